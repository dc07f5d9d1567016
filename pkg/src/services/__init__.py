# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Workflow modules, one per command-line subcommand."""
