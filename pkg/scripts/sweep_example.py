"""Run the example configurations and print a short summary of each table.

    python3 scripts/sweep_example.py
"""

from pathlib import Path

from nonideal_tpm.scenarios.config import load_config
from nonideal_tpm.scenarios.csvout import render
from nonideal_tpm.scenarios.pipelines import sweep

HERE = Path(__file__).resolve().parent / "configs"


def main() -> None:
    for name in ("rabi_sweep.json", "qutrit_crooks.json"):
        table = sweep(load_config(HERE / name), parallel=2)
        text = render(table).splitlines()
        print(f"== {name}: {len(table.rows)} rows")
        print("\n".join(text[:12]))
        if len(text) > 12:
            print(f"... ({len(text) - 12} more lines)")


if __name__ == "__main__":
    main()
