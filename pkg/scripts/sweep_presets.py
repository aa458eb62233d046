from __future__ import annotations

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from src.cli import configure_logging, load_config  # noqa: E402
from src.errors import PlanToolError  # noqa: E402
from src.pipeline import PlanToolkit  # noqa: E402
from src.recipes import catalog  # noqa: E402


def sweep(toolkit: PlanToolkit, output_dir: Path | None) -> list[tuple[str, str]]:
    failures: list[tuple[str, str]] = []
    for recipe in catalog():
        for preset in recipe.presets:
            label = recipe.recipe_id + (
                "(" + ",".join(f"{k}={v}" for k, v in preset.params.items()) + ")" if preset.params else ""
            )
            try:
                document = toolkit.generate(recipe.recipe_id, dict(preset.params))
                outcome = toolkit.verify(document)
            except PlanToolError as exc:
                failures.append((label, str(exc)))
                print(f"ERROR {label}: {exc}")
                continue
            if output_dir is not None:
                toolkit.write(document, output_dir / f"{label.replace('(', '_').rstrip(')')}.json", "json")
            status = "ok  " if outcome.passed else "FAIL"
            print(f"{status} {label}: m={document.plan.m} b={document.plan.b} k={document.plan.k}")
            for failed in outcome.report.failing_claims():
                failures.append((label, f"{failed.claim}: {failed.detail}"))
                print(f"     {failed.claim}: {failed.detail}")
    return failures


def main() -> int:
    parser = argparse.ArgumentParser(description="Generate and verify every catalog preset")
    parser.add_argument("--config", type=Path, default=ROOT / "config.yaml")
    parser.add_argument("--out", type=Path, default=None, help="Also write each plan document here")
    args = parser.parse_args()

    config = load_config(args.config, explicit=False)
    configure_logging(config, None)
    failures = sweep(PlanToolkit(config), args.out)
    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
