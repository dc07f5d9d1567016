# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""wavedecay: damped-wave energy decay laboratory."""
