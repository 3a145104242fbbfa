"""Regenerates transcript.jsonl for the 20-task replay fixture.

Prompts are rendered here without the library, so the transcript also pins
the prompt layout. Each response carries a hand-assigned verdict under the
first-token rule (first whitespace token, outer punctuation removed, case
ignored, must equal the gold label).
"""
import hashlib
import json
import re
from pathlib import Path

HERE = Path(__file__).resolve().parent

# (task id, response, hand verdict)
RESPONSES = [
    ("t00", "A", True),
    ("t01", "B.", True),
    ("t02", "c", True),
    ("t03", "D) 1989", True),
    ("t04", "B", False),
    ("t05", "  B", True),
    ("t06", "The answer is C", False),
    ("t07", "", False),
    ("t08", "A\nExplanation: 12 / 3 = 4", True),
    ("t09", "(B)", True),
    ("t10", "Answer: C", False),
    ("t11", "D", True),
    ("t12", "a.", True),
    ("t13", "C", False),
    ("t14", "C", True),
    ("t15", "I don't know", False),
    ("t16", "AB", False),
    ("t17", "**B**", True),
    ("t18", "C", True),
    ("t19", "E", False),
]

EXPECTED_CORRECT = 12
EXPECTED_TOTAL = 20


def fill(text, slots):
    return re.sub(r"\{([A-Za-z_][A-Za-z0-9_]*)\}", lambda m: slots[m.group(1)], text)


def render(template, slots):
    description = fill(template["description"], slots)
    out = description + " " + template["verbalizer_text"] + "\n\n"
    for demo in template.get("demos", []):
        out += demo["input"] + "\n" + template["answer_cue"] + " " + demo["answer"] + "\n\n"
    out += fill(template["layout"], slots) + "\n" + template["answer_cue"]
    return out


def main():
    template = json.loads((HERE / "template.json").read_text())
    tasks = {}
    for line in (HERE / "tasks.jsonl").read_text().splitlines():
        row = json.loads(line)
        if "header" not in row:
            tasks[row["id"]] = row
    assert len(tasks) == EXPECTED_TOTAL == len(RESPONSES)
    assert sum(v for _, _, v in RESPONSES) == EXPECTED_CORRECT

    with open(HERE / "transcript.jsonl", "w") as f:
        for task_id, response, _ in RESPONSES:
            prompt = render(template, tasks[task_id]["slots"])
            digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
            f.write(json.dumps({"prompt_hash": digest, "response": response}) + "\n")


if __name__ == "__main__":
    main()
