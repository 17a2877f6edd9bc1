#!/usr/bin/env python3
"""Validate jacspec report JSON files against tools/report.schema.json."""
import json
import pathlib
import sys

import jsonschema


def main(argv):
    schema_path = pathlib.Path(__file__).with_name("report.schema.json")
    schema = json.loads(schema_path.read_text())
    validator = jsonschema.Draft202012Validator(schema)
    bad = 0
    for name in argv[1:]:
        report = json.loads(pathlib.Path(name).read_text())
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        for e in errors:
            print(f"{name}: {'/'.join(map(str, e.path))}: {e.message}")
        bad += bool(errors)
    if len(argv) < 2:
        print("no reports given")
        return 1
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
