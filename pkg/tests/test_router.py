from collections import Counter

import pytest

from formbridge.router import (
    AdapterSpec,
    AmbiguousTask,
    EmptyRequest,
    Lexicon,
    NoAdapterForKind,
    NoPipelineForKind,
    RouterConfigError,
    classify_task,
    dispatch,
    kind_from_token,
    load_adapters,
    load_corpus,
    load_lexicon,
    parse_adapters,
    parse_corpus,
    parse_lexicon,
)
from formbridge.taxonomy import TaskKind


@pytest.fixture(scope="module")
def shipped():
    import importlib.resources as res

    base = res.files("formbridge") / "data"
    return (load_lexicon(str(base / "lexicon.txt")),
            load_adapters(str(base / "adapters.txt")),
            load_corpus(str(base / "corpus.txt")))


def test_task_kind_values_are_stable():
    assert [k.value for k in TaskKind] == [
        "DraftModelStructure", "AlignOntologies", "ReconcileSchema",
        "VerifyModelLogic", "SpecifyProcessModel", "FormalizeRules",
        "DocumentModel", "OrchestrateWorkflow", "GenerateSimulationCode",
        "TranslateCode", "GenerateTests", "GenerateDocumentation",
        "AnalyzeRequirements",
    ]
    assert kind_from_token("GenerateTests") is TaskKind.GENERATE_TESTS
    with pytest.raises(RouterConfigError, match="unknown task kind 'NotAKind'"):
        kind_from_token("NotAKind")


def test_lexicon_validation():
    with pytest.raises(ValueError, match="must not be empty"):
        Lexicon({})
    with pytest.raises(ValueError, match="no keywords for GenerateTests"):
        Lexicon({TaskKind.GENERATE_TESTS: {}})
    with pytest.raises(ValueError, match="empty keyword"):
        Lexicon({TaskKind.GENERATE_TESTS: {"": 1.0}})
    with pytest.raises(ValueError, match="weight must be positive"):
        Lexicon({TaskKind.GENERATE_TESTS: {"x": 0.0}})


def test_score_is_matched_weight_over_total_weight():
    lex = Lexicon({TaskKind.GENERATE_TESTS: {"Test": 2.0, "pytest": 1.0}})
    assert lex.score(TaskKind.GENERATE_TESTS, "please TEST this") == pytest.approx(2 / 3)
    assert lex.score(TaskKind.GENERATE_TESTS, "pytest test run") == 1.0
    assert lex.score(TaskKind.GENERATE_TESTS, "nothing") == 0.0


def _small_lexicon():
    return Lexicon({
        TaskKind.DRAFT_MODEL_STRUCTURE: {"class": 2.0, "model": 1.0, "sketch": 1.0},
        TaskKind.GENERATE_TESTS: {"test": 2.0, "pytest": 1.0},
    })


def _small_adapters():
    return [AdapterSpec(TaskKind.DRAFT_MODEL_STRUCTURE, "bravo"),
            AdapterSpec(TaskKind.DRAFT_MODEL_STRUCTURE, "alpha"),
            AdapterSpec(TaskKind.GENERATE_TESTS, "tst")]


def test_classify_picks_the_best_kind_and_name_sorted_adapter():
    decision = classify_task("test the class", _small_lexicon(), 0.25, _small_adapters())
    assert decision.task is TaskKind.GENERATE_TESTS
    assert decision.confidence == pytest.approx(2 / 3)
    assert decision.runner_up == (TaskKind.DRAFT_MODEL_STRUCTURE, 0.5)
    winner = classify_task("sketch a class model", _small_lexicon(), 0.25, _small_adapters())
    assert winner.adapter.name == "alpha"  # two adapters serve the kind; first by name


def test_classify_breaks_exact_ties_in_kind_declaration_order():
    lex = Lexicon({TaskKind.GENERATE_TESTS: {"shared": 1.0},
                   TaskKind.ALIGN_ONTOLOGIES: {"shared": 1.0}})
    adapters = [AdapterSpec(TaskKind.GENERATE_TESTS, "g"),
                AdapterSpec(TaskKind.ALIGN_ONTOLOGIES, "a")]
    decision = classify_task("a shared word", lex, 0.25, adapters)
    assert decision.task is TaskKind.ALIGN_ONTOLOGIES
    assert decision.runner_up == (TaskKind.GENERATE_TESTS, 1.0)


def test_classify_error_paths():
    with pytest.raises(EmptyRequest, match="request is empty"):
        classify_task("   ", _small_lexicon(), 0.25, _small_adapters())
    with pytest.raises(AmbiguousTask, match="no task kind scored above threshold") as info:
        classify_task("nothing relevant", _small_lexicon(), 0.25, _small_adapters())
    assert "DraftModelStructure=0.000" in str(info.value)
    with pytest.raises(NoAdapterForKind, match="no adapter registered for GenerateTests"):
        classify_task("pytest please", _small_lexicon(), 0.25, _small_adapters()[:2])
    for threshold in (0.0, 1.0001, -1):
        with pytest.raises(ValueError, match=r"threshold must lie in \(0, 1\]"):
            classify_task("x", _small_lexicon(), threshold, _small_adapters())


def test_adapter_spec_validation():
    with pytest.raises(ValueError, match="name must be nonempty"):
        AdapterSpec(TaskKind.GENERATE_TESTS, "")
    with pytest.raises(ValueError, match="load_cost_ms"):
        AdapterSpec(TaskKind.GENERATE_TESTS, "x", load_cost_ms=-1)
    with pytest.raises(ValueError, match="mem_mb"):
        AdapterSpec(TaskKind.GENERATE_TESTS, "x", mem_mb=float("nan"))


def test_dispatch_prefixes_the_preamble_and_copies_context():
    lex = Lexicon({TaskKind.GENERATE_TESTS: {"test": 2.0}})
    adapters = [AdapterSpec(TaskKind.GENERATE_TESTS, "tst",
                            prompt_preamble="You write tests.")]
    decision = classify_task("test it", lex, 0.25, adapters)
    invocation = dispatch(decision, "test it", {TaskKind.GENERATE_TESTS: "PIPE"},
                          context={"k": 1})
    assert invocation.pipeline == "PIPE"
    assert invocation.prompt == "You write tests.\ntest it"
    assert invocation.context == {"k": 1}
    assert invocation.adapter.name == "tst"
    with pytest.raises(NoPipelineForKind, match="GenerateTests"):
        dispatch(decision, "test it", {})


LEXICON_ERRORS = [
    ("kind NotAKind\n", "unknown task kind 'NotAKind'"),
    ("kw test 2\n", "line 1: 'kw' before any 'kind'"),
    ("kind GenerateTests\nkw test abc\n", "line 2: bad weight 'abc'"),
    ("kind GenerateTests\nkw test\n", "line 2: expected 'kw <keyword> <weight>'"),
    ("kind GenerateTests\nbogus\n", "line 2: expected 'kind' or 'kw', got 'bogus'"),
    ("kind GenerateTests\nkind GenerateTests\nkw x 1\n", "line 2: duplicate kind"),
]


@pytest.mark.parametrize("text,message", LEXICON_ERRORS, ids=lambda v: str(v)[:26])
def test_parse_lexicon_errors(text, message):
    with pytest.raises(RouterConfigError) as info:
        parse_lexicon(text)
    assert message in str(info.value)


def test_parse_lexicon_reads_kind_blocks():
    lex = parse_lexicon("# c\nkind GenerateTests\n  kw Test 2\n  kw pytest 1\n")
    assert lex.kinds() == [TaskKind.GENERATE_TESTS]
    assert lex.keywords(TaskKind.GENERATE_TESTS) == {"test": 2.0, "pytest": 1.0}


ADAPTER_ERRORS = [
    ("adapter x\n", "expected 'adapter <kind> <name> load_ms=<n> mem_mb=<n>'"),
    ("adapter NotAKind alpha load_ms=1 mem_mb=2\n", "unknown task kind 'NotAKind'"),
    ("adapter GenerateTests alpha load_ms=x mem_mb=2\n", "line 1: bad number in 'load_ms=x'"),
    ("bogus GenerateTests alpha\n", "expected 'adapter"),
]


@pytest.mark.parametrize("text,message", ADAPTER_ERRORS, ids=lambda v: str(v)[:26])
def test_parse_adapters_errors(text, message):
    with pytest.raises(RouterConfigError) as info:
        parse_adapters(text)
    assert message in str(info.value)


def test_parse_adapters_reads_profiles():
    got = parse_adapters("adapter GenerateTests alpha load_ms=75 mem_mb=220\n"
                         "adapter GenerateTests beta load_ms=3 mem_mb=4\n")
    assert [(a.name, a.load_cost_ms, a.mem_mb) for a in got] == [
        ("alpha", 75.0, 220.0), ("beta", 3.0, 4.0)]
    assert got[0].task is TaskKind.GENERATE_TESTS


def test_parse_corpus():
    assert parse_corpus("# c\nGenerateTests write a test\n") == [
        (TaskKind.GENERATE_TESTS, "write a test")]
    with pytest.raises(RouterConfigError, match="unknown task kind 'NotAKind'"):
        parse_corpus("NotAKind say something\n")
    with pytest.raises(RouterConfigError, match="expected '<TaskKind> <utterance>'"):
        parse_corpus("GenerateTests\n")


def test_shipped_configs_cover_every_kind(shipped):
    lexicon, adapters, corpus = shipped
    assert lexicon.kinds() == list(TaskKind)
    assert {a.task for a in adapters} == set(TaskKind)
    counts = Counter(kind for kind, _ in corpus)
    assert set(counts) == set(TaskKind)
    assert min(counts.values()) >= 3


def test_shipped_corpus_spot_checks(shipped):
    lexicon, adapters, _ = shipped
    checks = [
        ("draft a first sketch of the inventory model", TaskKind.DRAFT_MODEL_STRUCTURE),
        ("write a test for the rate limiter", TaskKind.GENERATE_TESTS),
        ("align these two ontologies", TaskKind.ALIGN_ONTOLOGIES),
    ]
    for utterance, want in checks:
        assert classify_task(utterance, lexicon, 0.25, adapters).task is want
