"""hf-bridge command: run the full-scale recipe on instance JSONL files."""

from __future__ import annotations

import argparse
import sys

from .config import BridgeConfig
from .data import BridgeError
from .train import bridge_train


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hf-bridge", description=__doc__)
    parser.add_argument("--config", help="JSON file with BridgeConfig fields")
    parser.add_argument("--encoder", help="model name or path (overrides config)")
    parser.add_argument("--pretrain", help="silver instance JSONL; omit for baseline mode")
    parser.add_argument("--train", required=True)
    parser.add_argument("--dev")
    parser.add_argument("--test", required=True)
    parser.add_argument("--max-steps", type=int, dest="max_steps")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--device")
    parser.add_argument("--report", required=True)
    args = parser.parse_args(argv)

    config = BridgeConfig.from_json(args.config) if args.config else BridgeConfig()
    for key in ("encoder", "max_steps", "epochs", "device"):
        value = getattr(args, key)
        if value is not None:
            setattr(config, key, value)

    try:
        report = bridge_train(
            config,
            train_path=args.train,
            test_path=args.test,
            pretrain_path=args.pretrain,
            dev_path=args.dev,
            report_path=args.report,
        )
    except (BridgeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    mean = sum(c["macro_f1"] for c in report["cells"]) / max(1, len(report["cells"]))
    print(f"wrote {args.report} (mean test Macro-F1 {mean:.4f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
