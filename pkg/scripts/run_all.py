"""Run every config in configs/ through the CLI and print a pass/fail table."""
import argparse
import json
import sys
import time
from pathlib import Path

from fracpot.cli import load_config, run

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default=str(ROOT / "configs"))
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--only", nargs="*", help="config stems to run")
    args = ap.parse_args()
    paths = sorted(Path(args.configs).glob("*.json"))
    if args.only:
        paths = [p for p in paths if p.stem in args.only]
    failed = 0
    for path in paths:
        cfg = load_config(path)
        t0 = time.time()
        ok = run(cfg["experiment"], cfg, Path(args.out) / path.stem, int(cfg.get("seed", 0)))
        failed += not ok
        metrics = json.loads((Path(args.out) / path.stem / f"{cfg['experiment']}.json").read_text())
        print(f"{path.stem:28s} {'pass' if ok else 'FAIL':5s} {time.time() - t0:6.1f} s  "
              f"{json.dumps(metrics['metrics'])[:90]}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
