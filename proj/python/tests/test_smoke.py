import os
from pathlib import Path

import pytest

import lexprompt as lp

FIXTURES = Path(os.environ.get("LEXPROMPT_FIXTURES", Path(__file__).resolve().parents[2] / "tests" / "fixtures"))


def cola():
    template = lp.PromptTemplate.load(FIXTURES / "cola" / "template.json")
    pool = lp.TaskPool.load(FIXTURES / "cola" / "train.jsonl")
    return template, pool


def test_description_edits():
    d = lp.TaskDescription("Does this sentence make sense?")
    assert len(d) == 5
    assert d.with_word(2, "repeat").render() == "Does this repeat make sense?"
    assert d.masked(1) == "Does [MASK] sentence make sense?"
    with pytest.raises(lp.EmptyDescription):
        lp.TaskDescription("   ")


def test_render_matches_layout():
    template, _ = cola()
    assert template.render({"sentence": "He walk."}) == (
        "Does this sentence make sense? Do not respond with anything other than the labels "
        "'Yes' or 'No'.\n\nQuestion: He walk.\nAnswer:"
    )
    with pytest.raises(lp.MissingPlaceholder):
        template.render({})


def test_replay_fixture_accuracy():
    template = lp.PromptTemplate.load(FIXTURES / "harness" / "template.json")
    pool = lp.TaskPool.load(FIXTURES / "harness" / "tasks.jsonl")
    oracle = lp.TranscriptOracle.load(FIXTURES / "harness" / "transcript.jsonl")
    result = lp.evaluate(oracle, template, pool)
    assert (result["correct"], result["total"]) == (12, 20)


def test_planted_optimum():
    template, pool = cola()
    oracle = lp.RuleOracle({"base_loss": 0.8, "rules": [{"contains": "repeat", "delta": -0.5}]}, template, pool)
    provider = lp.StaticFillMaskProvider.load(FIXTURES / "cola" / "provider.json")
    params = lp.OptimizationParams(reference_size=10, candidate_k=3)
    optimized, trace = lp.optimize(oracle, provider, template, pool, params)
    assert optimized.description.render() == "Does this repeat make sense?"
    assert trace["final_loss"] == {"num": 3, "den": 10}
    assert sum(it["accepted"] for it in trace["iterations"]) == 1
    assert lp.replay_trace(trace) == optimized.description


def test_python_oracle_and_provider():
    template, pool = cola()

    class Always(lp.CompletionOracle):
        def complete(self, prompt):
            return "Yes" if "repeat" in prompt else "Maybe"

        def identity(self):
            return "always"

    class Provider(lp.FillMaskProvider):
        def fill(self, text, k):
            return [("repeat", 0.9), ("other", 0.1)]

    assert Provider().fill_mask("a [MASK]", 1) == [("repeat", 0.9)]
    with pytest.raises(lp.BadMaskCount):
        Provider().fill_mask("a b", 1)

    optimized, trace = lp.optimize(Always(), Provider(), template, pool,
                                   lp.OptimizationParams(reference_size=10, candidate_k=2))
    assert "repeat" in optimized.description.words
    assert trace["final_loss"]["num"] <= trace["initial_loss"]["num"]


def test_defaults():
    p = lp.OptimizationParams()
    assert (p.reference_size, p.candidate_k, p.target_fraction, p.order) == (100, 30, 0.7, "influence")


def test_influence_single_word():
    template, pool = cola()
    one = template.with_description(lp.TaskDescription("Sensible?"))
    oracle = lp.RuleOracle({"base_loss": 0.5, "rules": []}, one, pool)
    scores = lp.influence(oracle, one, pool, reference_size=10)
    assert [(w, float(r)) for w, r in scores] == [("Sensible?", 0.0)]
