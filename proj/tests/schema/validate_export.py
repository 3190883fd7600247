"""Validate an exported run against the published JSON schemas."""
import json
import sys
from pathlib import Path

import jsonschema


def main() -> int:
    schema_dir, export_dir = Path(sys.argv[1]), Path(sys.argv[2])
    pairs = [("tracking_graph.schema.json", "tracking_graph.json"), ("layout.schema.json", "layout.json")]
    failed = False
    for schema_name, doc_name in pairs:
        schema = json.loads((schema_dir / schema_name).read_text())
        doc = json.loads((export_dir / doc_name).read_text())
        validator = jsonschema.Draft202012Validator(schema)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        for e in errors[:10]:
            print(f"{doc_name}: {'/'.join(map(str, e.path))}: {e.message}")
        failed |= bool(errors)
        print(f"{doc_name}: {'FAIL' if errors else 'ok'}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
