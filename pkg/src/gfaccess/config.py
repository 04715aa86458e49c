"""Plain ``key = value`` configuration files (``#`` starts a comment)."""

from __future__ import annotations

from pathlib import Path

from .errors import InputError


def read_keyvalue(path) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise InputError(f"{path}:{lineno}: empty key")
        out[key] = value
    return out
