import json
from dataclasses import asdict
from pathlib import Path

from core.exceptions import MalformedInputError
from core.models import RunManifest
from core.services.records import write_json


def manifest_path_for(output: Path) -> Path:
    output = Path(output)
    return output.with_name(f"{output.stem}.manifest.json")


def write_manifest(manifest: RunManifest, path: Path) -> Path:
    return write_json(path, asdict(manifest))


def load_manifest(path: Path) -> RunManifest:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return RunManifest(**data)
    except OSError as e:
        raise MalformedInputError(f"не удалось прочитать {path}: {e.strerror}")
    except (UnicodeDecodeError, json.JSONDecodeError, TypeError) as e:
        raise MalformedInputError(f"{path}: не манифест запуска ({e})")
