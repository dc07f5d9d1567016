# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.
"""Utility functions for the command-line interface."""

import logging
from pathlib import Path

from pydantic import ValidationError
from rich.console import Console
from rich.markdown import Markdown

logger = logging.getLogger(__name__)

HELP_DIRECTORY = Path(__file__).parent / "help"


def load_help(help_file: str) -> str:
    """Load help content from a markdown file, with error handling.

    Args:
        help_file: Name of the help file (without .md extension)

    Returns:
        The markdown text, or an empty string when the file cannot be read.

    """
    help_path = HELP_DIRECTORY / f"{help_file}.md"
    if not help_path.exists():
        logger.error("Help file not found: %s.md", help_file)
        return ""
    try:
        return help_path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        logger.error("Error loading help: %s", e)
        return ""


def help_summary(help_file: str) -> str:
    """First non-heading paragraph of a help file, for argparse descriptions."""
    for block in load_help(help_file).split("\n\n"):
        text = block.strip()
        if text and not text.startswith("#"):
            return " ".join(text.split())
    return ""


def validation_messages(error: ValidationError) -> list[str]:
    """Flatten a pydantic error into one "key: message" line per problem."""
    messages = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "scenario"
        messages.append(f"{location}: {item['msg']}")
    return messages


def handle_validation_errors(
    errors: list[str], help_key: str = "validation-tips", console: Console | None = None
) -> None:
    """Log every error message, then render the matching tips.

    Args:
        errors: List of error messages to display.
        help_key: Key for help content to show tips (default: "validation-tips").
        console: Console receiving the tips; stderr by default.

    """
    logger.error("Please fix the following issues:")
    for err in errors:
        logger.error("• %s", err)
    tips = load_help(help_key)
    if tips:
        (console or Console(stderr=True)).print(Markdown(tips))
