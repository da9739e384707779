from __future__ import annotations

import fnmatch
import hashlib
import json
import logging
import subprocess
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"

_CONFIGURED = False


def ensure_dir(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)


def sha256_text(s: str) -> str:
    return hashlib.sha256(s.encode("utf-8", errors="replace")).hexdigest()


def blake2b_hex(s: str, digest_size: int = 16) -> str:
    return hashlib.blake2b(s.encode("utf-8", errors="replace"), digest_size=digest_size).hexdigest()


def stable_settings_hash(d: Dict[str, Any]) -> str:
    # Stable hash of settings (sorted keys) so runs are comparable
    blob = json.dumps(d, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def derive_seed(root_seed: int, *keys: Any) -> int:
    """
    Fold (root_seed, keys...) into a 32-bit seed.
    Same inputs give the same seed regardless of which worker asks.
    """
    key_input = "|".join([str(int(root_seed)), *[str(k) for k in keys]])
    return int(blake2b_hex(key_input, digest_size=4), 16)


def dumps_json(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True)


def write_json_atomic(path: Path, obj: Any) -> None:
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    tmp_path.write_text(dumps_json(obj) + "\n", encoding="utf-8", newline="\n")
    tmp_path.replace(path)


def append_jsonl(path: Path, row: Dict[str, Any]) -> None:
    with path.open("a", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")) + "\n")


def configure_stdout(errors: str = "replace") -> None:
    try:
        sys.stdout.reconfigure(errors=errors)
    except Exception:
        pass


def configure_logging(level: str = "INFO", fmt: str = "text") -> None:
    """
    Install one handler on the `radtd` logger.
    fmt='text' uses coloredlogs, fmt='json' uses python-json-logger.
    """
    global _CONFIGURED
    logger = logging.getLogger("radtd")
    if _CONFIGURED:
        logger.setLevel(level.upper())
        return

    if fmt == "json":
        from pythonjsonlogger.json import JsonFormatter

        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(JsonFormatter(LOG_FORMAT))
        logger.addHandler(handler)
        logger.setLevel(level.upper())
    else:
        import coloredlogs

        coloredlogs.install(level=level.upper(), logger=logger, fmt=LOG_FORMAT, stream=sys.stderr)
    logger.propagate = False
    _CONFIGURED = True


def get_git_info(start_dir: Path) -> Tuple[Any, Any]:
    try:
        repo_root_str = subprocess.run(
            ["git", "rev-parse", "--show-toplevel"],
            cwd=start_dir,
            capture_output=True,
            text=True,
            check=True,
        ).stdout.strip()
        repo_root = Path(repo_root_str).resolve()
        commit = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            cwd=repo_root,
            capture_output=True,
            text=True,
            check=True,
        ).stdout.strip()
        dirty = subprocess.run(
            ["git", "status", "--porcelain"],
            cwd=repo_root,
            capture_output=True,
            text=True,
            check=True,
        ).stdout.strip()
        return commit, bool(dirty)
    except Exception:
        return None, None


def _is_hidden_path(path: Path) -> bool:
    return any(part.startswith(".") for part in path.parts)


def _matches_exclude_globs(path: Path, exclude_globs: Iterable[str]) -> bool:
    path_posix = path.as_posix()
    for pattern in exclude_globs:
        pattern = pattern.replace("\\", "/")
        if fnmatch.fnmatchcase(path_posix, pattern) or fnmatch.fnmatchcase(path.name, pattern):
            return True
    return False


def iter_csv_files(
    root: Path,
    recursive: bool = True,
    exclude_globs: Optional[Iterable[str]] = None,
    exclude_hidden: bool = True,
) -> List[Path]:
    if root.is_file():
        candidates = [root] if root.suffix.lower() == ".csv" else []
    else:
        pattern = "**/*.csv" if recursive else "*.csv"
        candidates = sorted([p for p in root.glob(pattern) if p.is_file()])

    excludes = [g for g in (exclude_globs or []) if g]
    out: List[Path] = []
    for path in candidates:
        rel = Path(path.name) if root.is_file() else path.relative_to(root)
        if exclude_hidden and _is_hidden_path(rel):
            continue
        if excludes and _matches_exclude_globs(rel, excludes):
            continue
        out.append(path)
    return out
