import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

CASES_PATH = Path(__file__).parent / "data" / "cases.json"


def load_cases(section):
    with CASES_PATH.open("r", encoding="utf-8") as fh:
        return json.load(fh)[section]


def make_id(case):
    return case["title"]
