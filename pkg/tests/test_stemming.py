import pytest

from lexshift.stemming import PorterStemmer, porter_stem

# Classic vocabulary/output pairs, each traced through the full algorithm.
REFERENCE_PAIRS = [
    ("running", "run"),
    ("caresses", "caress"),
    ("flies", "fli"),
    ("dies", "di"),
    ("mules", "mule"),
    ("denied", "deni"),
    ("died", "di"),
    ("agreed", "agre"),
    ("owned", "own"),
    ("humbled", "humbl"),
    ("sized", "size"),
    ("meeting", "meet"),
    ("stating", "state"),
    ("itemization", "item"),
    ("traditional", "tradit"),
    ("reference", "refer"),
    ("colonizer", "colon"),
    ("plotted", "plot"),
    ("generalizations", "gener"),
    ("oscillators", "oscil"),
    ("delve", "delv"),
    ("delving", "delv"),
    ("meticulously", "meticul"),
    ("relational", "relat"),
    ("conditional", "condit"),
    ("rational", "ration"),
    ("valenci", "valenc"),
    ("hesitanci", "hesit"),
    ("digitizer", "digit"),
    ("radicalli", "radic"),
    ("differentli", "differ"),
    ("vileli", "vile"),
    ("analogousli", "analog"),
    ("vietnamization", "vietnam"),
    ("predication", "predic"),
    ("operator", "oper"),
    ("feudalism", "feudal"),
    ("decisiveness", "decis"),
    ("hopefulness", "hope"),
    ("callousness", "callous"),
    ("formaliti", "formal"),
    ("sensitiviti", "sensit"),
    ("sensibiliti", "sensibl"),
    ("triplicate", "triplic"),
    ("formative", "form"),
    ("formalize", "formal"),
    ("electriciti", "electr"),
    ("electrical", "electr"),
    ("hopeful", "hope"),
    ("goodness", "good"),
    ("revival", "reviv"),
    ("allowance", "allow"),
    ("inference", "infer"),
    ("airliner", "airlin"),
    ("gyroscopic", "gyroscop"),
    ("adjustable", "adjust"),
    ("defensible", "defens"),
    ("irritant", "irrit"),
    ("replacement", "replac"),
    ("adjustment", "adjust"),
    ("dependent", "depend"),
    ("adoption", "adopt"),
    ("communism", "commun"),
    ("activate", "activ"),
    ("angulariti", "angular"),
    ("homologous", "homolog"),
    ("effective", "effect"),
    ("bowdlerize", "bowdler"),
    ("probate", "probat"),
    ("rate", "rate"),
    ("cease", "ceas"),
    ("controll", "control"),
    ("roll", "roll"),
    ("cats", "cat"),
    ("feed", "feed"),
    ("ties", "ti"),
    ("caress", "caress"),
    ("poni", "poni"),
    ("sky", "sky"),
    ("happy", "happi"),
    ("conflated", "conflat"),
    ("troubled", "troubl"),
    ("hopping", "hop"),
    ("tanned", "tan"),
    ("falling", "fall"),
    ("hissing", "hiss"),
    ("failing", "fail"),
    ("filing", "file"),
    ("certainly", "certainli"),
    ("clarity", "clariti"),
    ("underscore", "underscor"),
    ("comprehend", "comprehend"),
    ("boast", "boast"),
    ("swift", "swift"),
]


@pytest.mark.parametrize("word,expected", REFERENCE_PAIRS)
def test_reference_pairs(word, expected):
    assert porter_stem(word) == expected


def test_short_words_untouched():
    # length-1 and length-2 inputs are left as-is
    for w in ("as", "is", "be", "a", "i", "to"):
        assert porter_stem(w) == w


def test_fixed_points():
    for w in ("run", "cat", "market", "garden"):
        assert porter_stem(w) == w


def test_empty_string():
    assert porter_stem("") == ""


def test_instances_are_independent():
    a, b = PorterStemmer(), PorterStemmer()
    assert a.stem("running") == "run"
    assert b.stem("caresses") == "caress"
    assert a.stem("running") == "run"
