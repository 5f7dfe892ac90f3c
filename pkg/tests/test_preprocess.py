import numpy as np
import pytest

from docshield.corpus import LabeledDocument
from docshield.errors import InputError
from docshield.preprocess import (
    StopwordList,
    default_stopwords,
    load_stopwords,
    normalize_case,
    preprocess_document,
    preprocess_text,
    remove_stopwords,
    stem,
    strip_punctuation,
    tokenize,
)


def small_stoplist(*words):
    return StopwordList(words=frozenset(words))


class TestStages:
    def test_normalize_case(self):
        assert normalize_case("The CAT") == "the cat"
        assert normalize_case("") == ""
        assert normalize_case("DLP-2020") == "dlp-2020"

    def test_strip_punctuation(self):
        assert strip_punctuation("cat, sat!") == "cat  sat "
        assert strip_punctuation("e-mail") == "e mail"
        assert strip_punctuation("...") == "   "
        assert strip_punctuation("don't") == "don t"
        # unicode punctuation beyond ascii
        assert strip_punctuation("“quoted”") == " quoted "

    def test_tokenize(self):
        assert tokenize("the  cat sat") == ["the", "cat", "sat"]
        assert tokenize("   ") == []
        assert tokenize("a b a") == ["a", "b", "a"]

    def test_remove_stopwords(self):
        sl = small_stoplist("the", "is", "of", "that")
        assert remove_stopwords(["the", "cat"], sl) == ["cat"]
        assert remove_stopwords([], sl) == []
        assert remove_stopwords(["is", "of", "that", "leak"], sl) == ["leak"]


class TestPipeline:
    def test_composition(self):
        sl = small_stoplist("the")
        assert preprocess_text("The CAT, sat!", sl) == ["cat", "sat"]

    def test_empty(self):
        assert preprocess_text("", small_stoplist("the")) == []

    def test_paragraph_hand_trace(self):
        # Hand trace: lowercase, punctuation to spaces, split, drop
        # stopwords, stem each survivor.
        text = (
            "The employees were copying restricted files. "
            "Their manager, alarmed, blocked the transfers! "
            "Policies require reporting such activities."
        )
        sl = small_stoplist("the", "were", "their", "such")
        # employees -> employe (ees: 1a drops s, 1b eed? no: "employee" -> 1a "s" -> employee; trace below)
        #   employees -1a(s)-> employee -5a(m>1)-> employe
        #   copying -1b(ing)-> copi? no: stem "copy" has vowel -> "copy" -1c-> copi
        #   restricted -1b(ed)-> restrict
        #   files -1a-> file
        #   manager -> manag (step 4 er, m("manag")=2)
        #   alarmed -1b-> alarm
        #   blocked -1b-> block
        #   transfers -1a-> transfer
        #   policies -1a(ies)-> polici
        #   require -5a-> requir
        #   reporting -1b-> report
        #   activities -1a(ies)-> activiti -2(iviti)-> activ... actual: "activiti"
        #     ends "iviti" -> "active"? stem "act" m=1 > 0 -> "active";
        #     step4 ive: m("act")=1, not >1 -> survives; 5a: stem "activ" m=2>1
        #     -> drop e -> "activ"
        assert preprocess_text(text, sl) == [
            "employe", "copi", "restrict", "file",
            "manag", "alarm", "block", "transfer",
            "polici", "requir", "report", "activ",
        ]

    def test_output_invariants_random(self):
        rng = np.random.RandomState(7)
        sl = default_stopwords()
        alphabet = "abcdefghijklmnopqrstuvwxyz"
        pieces = ["the", "is", "of", "that", "Running!", "e-mail", "DLP-2020",
                  "caresses,", "...", "don't", "REPORTS"]
        for _ in range(200):
            n = rng.randint(0, 12)
            words = []
            for _ in range(n):
                if rng.rand() < 0.5:
                    words.append(pieces[rng.randint(len(pieces))])
                else:
                    w = "".join(alphabet[rng.randint(26)]
                                for _ in range(rng.randint(1, 9)))
                    words.append(w)
            text = " ".join(words)
            out = preprocess_text(text, sl)
            # Punctuation replacement can split one whitespace token into
            # several ("e-mail" -> "e mail"), so the count bound is taken
            # after that stage; everything downstream filters or maps 1:1.
            n_after_punct = len(strip_punctuation(normalize_case(text)).split())
            assert len(out) <= n_after_punct
            for tok in out:
                assert tok
                assert tok == tok.lower()
                assert tok not in sl
                assert not any(ch in "!,.-'“”" for ch in tok)

    def test_stability_on_fixed_points(self):
        # Re-running the pipeline over its own (space-rejoined) output is a
        # no-op as long as every token is a stemming fixed point; tokens
        # where Porter is not idempotent are filtered out first.
        sl = default_stopwords()
        text = ("Classified documents were exfiltrated through personal "
                "email accounts, violating the agreed retention policies.")
        out = preprocess_text(text, sl)
        stable = [t for t in out if stem(t) == t]
        assert preprocess_text(" ".join(stable), sl) == stable

    def test_stemmed_form_of_stopword_is_removed(self):
        # "being" stems to "be"; with both in the stoplist nothing leaks,
        # with neither in it the token passes through.
        sl = default_stopwords()
        assert "being" in sl.words and "be" in sl.words
        assert preprocess_text("being", sl) == []
        # A stem landing in the stoplist must be caught by the second pass:
        # "thi" is not a stopword but "this" is; craft the reverse case.
        custom = small_stoplist("run")
        assert preprocess_text("running runs", custom) == []

    def test_document_wrapper(self):
        doc = LabeledDocument(doc_id="d1", source_path="d1.txt",
                              raw_text="The cat sat.", label="Internal")
        out = preprocess_document(doc, small_stoplist("the"))
        assert out.doc_id == "d1"
        assert out.tokens == ("cat", "sat")


class TestStopwordLoading:
    def test_default_list(self):
        sl = default_stopwords()
        assert 100 <= len(sl) <= 200
        for w in ["is", "of", "that", "the"]:
            assert w in sl

    def test_load_from_file(self, tmp_path):
        p = tmp_path / "words.txt"
        p.write_text("# comment\nThe\n\ncat\n", encoding="utf-8")
        sl = load_stopwords(p)
        assert sl.words == frozenset({"the", "cat"})

    def test_embedded_whitespace_rejected(self, tmp_path):
        p = tmp_path / "words.txt"
        p.write_text("good\nbad entry\n", encoding="utf-8")
        with pytest.raises(InputError, match="words.txt:2"):
            load_stopwords(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="cannot read"):
            load_stopwords(tmp_path / "absent.txt")

    def test_constructor_validation(self):
        with pytest.raises(InputError):
            StopwordList(words=frozenset({"OK"}))
        with pytest.raises(InputError):
            StopwordList(words=frozenset({""}))
