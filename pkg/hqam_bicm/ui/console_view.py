# hqam_bicm/ui/console_view.py
import json
import sys
from typing import Any, TextIO


class ConsoleView:
    """Presents command results on stdout and messages on stderr."""

    def __init__(self, out: TextIO = None, err: TextIO = None, quiet: bool = False):
        self.out = out if out is not None else sys.stdout
        self.err = err if err is not None else sys.stderr
        self.quiet = quiet

    def show_message(self, title: str, message: str, msg_type: str = "info") -> None:
        """Print a message box equivalent to stderr."""
        if self.quiet and msg_type == "info":
            return
        self.err.write(f"[{msg_type.upper()}] {title}: {message}\n")

    def emit_text(self, text: str) -> None:
        self.out.write(text if text.endswith("\n") else text + "\n")

    def emit_json(self, payload: Any) -> None:
        self.out.write(json.dumps(payload, indent=2, default=str) + "\n")
