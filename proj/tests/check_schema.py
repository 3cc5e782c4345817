"""Validates shipped configs and the inputs echoed in result.json against the scenario schema."""
import json
import pathlib
import sys

import jsonschema

root = pathlib.Path(sys.argv[1])
schema = json.loads((root / "schemas" / "scenario.schema.json").read_text())
validator = jsonschema.Draft202012Validator(schema) if hasattr(jsonschema, "Draft202012Validator") else jsonschema.Draft7Validator(schema)

docs = [(p, json.loads(p.read_text())) for p in sorted((root / "configs").glob("*.json"))]
for extra in sys.argv[2:]:
    p = pathlib.Path(extra)
    docs.append((p, json.loads(p.read_text())["inputs"]))

bad = 0
for path, doc in docs:
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
    for e in errors:
        print(f"{path}: {'.'.join(map(str, e.path)) or '<root>'}: {e.message}")
    bad += bool(errors)
print(f"{len(docs) - bad} of {len(docs)} documents valid")
sys.exit(1 if bad else 0)
