# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Test modules for the wavedecay laboratory."""
