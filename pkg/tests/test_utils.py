# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.
"""Unit tests for utils.py."""

import io
import logging

import pytest
from pydantic import ValidationError
from rich.console import Console

import utils
from scenario import Scenario


def test_load_help_reads_markdown():
    assert "Getting Started" in utils.load_help("quick-help")


def test_load_help_missing_file(monkeypatch, tmp_path, caplog):
    monkeypatch.setattr(utils, "HELP_DIRECTORY", tmp_path)
    with caplog.at_level(logging.ERROR, logger="utils"):
        assert utils.load_help("nope") == ""
    assert "Help file not found: nope.md" in caplog.text


def test_load_help_undecodable_file(monkeypatch, tmp_path):
    monkeypatch.setattr(utils, "HELP_DIRECTORY", tmp_path)
    (tmp_path / "broken.md").write_bytes(b"\xff\xfe\xfa")
    assert utils.load_help("broken") == ""


def test_help_summary_skips_headings(monkeypatch, tmp_path):
    monkeypatch.setattr(utils, "HELP_DIRECTORY", tmp_path)
    (tmp_path / "topic.md").write_text("# Title\n\nFirst line\ncontinued.\n\nSecond.\n", encoding="utf-8")
    assert utils.help_summary("topic") == "First line continued."


def test_help_summary_of_subcommands():
    for name in ("certify", "run", "fit", "plot"):
        assert utils.help_summary(name)


def test_validation_messages_name_the_field():
    with pytest.raises(ValidationError) as excinfo:
        Scenario(name="bad name!", cfl=2.0)
    messages = utils.validation_messages(excinfo.value)
    assert any(m.startswith("name:") for m in messages)
    assert any(m.startswith("cfl:") for m in messages)


def test_validation_messages_model_level_error():
    with pytest.raises(ValidationError) as excinfo:
        Scenario(geometry="cartesian1d", n=3)
    (message,) = utils.validation_messages(excinfo.value)
    assert message.startswith("scenario:")
    assert "cartesian1d geometry needs n = 1" in message


def test_handle_validation_errors(monkeypatch, caplog):
    monkeypatch.setattr(utils, "load_help", lambda _key: "**Some tips**")
    buffer = io.StringIO()
    console = Console(file=buffer, force_terminal=False, width=80)
    with caplog.at_level(logging.ERROR, logger="utils"):
        utils.handle_validation_errors(["err1", "err2"], console=console)
    assert "Please fix the following issues:" in caplog.text
    assert "• err1" in caplog.text
    assert "• err2" in caplog.text
    assert "Some tips" in buffer.getvalue()


def test_handle_validation_errors_without_tips(monkeypatch):
    monkeypatch.setattr(utils, "load_help", lambda _key: "")
    buffer = io.StringIO()
    utils.handle_validation_errors(["err1"], console=Console(file=buffer))
    assert buffer.getvalue() == ""
