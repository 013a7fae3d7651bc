"""Batch figure rendering from a JSON manifest."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from parkfig.io import SchemaError
from parkfig.render import RenderError, batch


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="parkfig",
                                     description="Render figures from parkproc outputs")
    subs = parser.add_subparsers(dest="command", required=True)
    ren = subs.add_parser("render")
    ren.add_argument("--manifest", required=True, help="JSON manifest of plot jobs")
    ren.add_argument("--continue-on-error", action="store_true")
    args = parser.parse_args(argv)

    try:
        manifest = json.loads(Path(args.manifest).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return 1
    try:
        report = batch(manifest, continue_on_error=args.continue_on_error)
    except (RenderError, SchemaError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 2
    for r in report.results:
        status = "ok" if r["ok"] else f"FAILED: {r.get('error')}"
        print(f"{r['output']}: {status}")
    return 0 if report.ok else 2


if __name__ == "__main__":
    sys.exit(main())
