"""Curve fitting, correlation statistics, and corpus evaluation."""

import math
import os

import numpy as np
import pytest

from conftest import luma_image, natural_crops
from csfp import (
    DistortionKind,
    DistortionSpec,
    FitModel,
    LossKind,
    OqaRecord,
    evaluate_corpus,
    fit_curve,
    lcc,
    make_corpus,
    rmse,
    run_oqa,
    save_image,
    srocc,
)
from csfp.errors import DegenerateData, FormatError, TooFew
from csfp.oqa import load_subjective
from oracles import spearman_naive


def records_from(obj, subj):
    return [
        OqaRecord(f"img{i:03d}", float(o), float(s))
        for i, (o, s) in enumerate(zip(obj, subj))
    ]


class TestFit:
    def test_recovers_logistic_shape(self):
        true = FitModel((2.0, 1.5, 0.5, 0.3, 1.0))
        obj = np.linspace(-1.0, 2.0, 25)
        recs = records_from(obj, true.predict(obj))
        model = fit_curve(recs)
        assert rmse(model, recs) < 1e-6
        assert lcc(model, recs) > 1.0 - 1e-12

    def test_linear_data(self):
        obj = np.linspace(0.0, 1.0, 20)
        recs = records_from(obj, 3.0 * obj - 1.0)
        model = fit_curve(recs)
        assert rmse(model, recs) < 1e-2
        assert lcc(model, recs) > 0.999

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        obj = rng.random(15)
        recs = records_from(obj, np.sqrt(obj) + 0.1 * rng.random(15))
        assert fit_curve(recs).params == fit_curve(recs).params

    def test_too_few(self):
        recs = records_from(range(5), range(5))
        with pytest.raises(TooFew):
            fit_curve(recs)

    def test_constant_objective(self):
        recs = records_from([2.0] * 8, range(8))
        with pytest.raises(DegenerateData):
            fit_curve(recs)

    def test_non_finite_record(self):
        with pytest.raises(DegenerateData):
            OqaRecord("bad", float("nan"), 1.0)
        with pytest.raises(DegenerateData):
            OqaRecord("bad", 1.0, float("inf"))


class TestCorrelations:
    def test_srocc_identity_exact(self):
        recs = records_from([0.3, 0.1, 0.9, 0.5], [3.0, 1.0, 9.0, 5.0])
        assert srocc(recs) == 1.0

    def test_srocc_reversal_exact(self):
        recs = records_from([0.3, 0.1, 0.9, 0.5], [-3.0, -1.0, -9.0, -5.0])
        assert srocc(recs) == -1.0

    def test_srocc_monotone_transform_invariant(self):
        rng = np.random.default_rng(10)
        obj = rng.random(30)
        subj = rng.random(30)
        a = srocc(records_from(obj, subj))
        b = srocc(records_from(np.exp(4.0 * obj), subj))
        assert a == b

    def test_srocc_ties_match_hand_ranks(self):
        obj = [1.0, 2.0, 2.0, 3.0, 4.0]
        subj = [1.0, 3.0, 2.0, 4.0, 4.0]
        got = srocc(records_from(obj, subj))
        # hand-worked: ranks [1, 2.5, 2.5, 4, 5] and [1, 3, 2, 4.5, 4.5],
        # deviation dot products 9.0, 9.5, 9.5 (all exact dyadics), so the
        # correlation is 18/19 evaluated as num / (norm_a * norm_b)
        assert got == 9.0 / (math.sqrt(9.5) * math.sqrt(9.5))
        # independent oracle agrees up to last-ulp parenthesization
        assert abs(got - spearman_naive(obj, subj)) < 1e-12

    def test_srocc_needs_two(self):
        with pytest.raises(TooFew):
            srocc(records_from([1.0], [1.0]))

    def test_lcc_constant_predictions(self):
        # flat model output has zero variance; correlation defined as 0
        model = FitModel((0.0, 1.0, 0.0, 0.0, 5.0))
        recs = records_from([0.1, 0.4, 0.7], [1.0, 2.0, 3.0])
        assert lcc(model, recs) == 0.0


class TestSubjectiveCsv:
    def test_reads_dmos_column(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("image_id,dmos\na,1.5\nb,2.5\n")
        assert load_subjective(p) == {"a": 1.5, "b": 2.5}

    def test_reads_subjective_column(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("image_id,subjective\na,0.25\n")
        assert load_subjective(p) == {"a": 0.25}

    def test_rejects_missing_columns(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("name,score\na,1\n")
        with pytest.raises(FormatError):
            load_subjective(p)


@pytest.fixture(scope="module")
def blur_corpus(tmp_path_factory):
    """One natural source, six blur severities."""
    root = tmp_path_factory.mktemp("oqa_blur")
    src = root / "src"
    os.makedirs(src)
    save_image(luma_image(natural_crops(1, side=48, seed=30)[0]), src / "ref.png")
    specs = [
        DistortionSpec(DistortionKind.GAUSS_BLUR, s, 7)
        for s in (0.4, 0.7, 1.0, 1.5, 2.2, 3.0)
    ]
    out = root / "corpus"
    make_corpus(src, specs, out)
    return out / "manifest.csv"


class TestCorpusEval:
    def test_severity_proxy_and_order(self, blur_corpus, bundle_path):
        recs = evaluate_corpus(blur_corpus, bundle_path, "relu1")
        assert [r.subjective for r in recs] == [0.4, 0.7, 1.0, 1.5, 2.2, 3.0]
        assert all(r.image_id.startswith("ref__gauss_blur__") for r in recs)

    def test_blur_severity_ranks_perfectly(self, blur_corpus, bundle_path):
        recs = evaluate_corpus(blur_corpus, bundle_path, "relu1")
        assert srocc(recs) == 1.0

    def test_jobs_match_serial(self, blur_corpus, bundle_path):
        serial = evaluate_corpus(blur_corpus, bundle_path, "relu1", jobs=1)
        parallel = evaluate_corpus(blur_corpus, bundle_path, "relu1", jobs=2)
        assert [r.objective for r in serial] == [r.objective for r in parallel]

    def test_subjective_join(self, blur_corpus, bundle_path, tmp_path):
        recs = evaluate_corpus(blur_corpus, bundle_path, "relu1")
        scores = {r.image_id: 10.0 - i for i, r in enumerate(recs)}
        joined = evaluate_corpus(
            blur_corpus, bundle_path, "relu1", subjective=scores
        )
        assert [r.subjective for r in joined] == [10.0 - i for i in range(6)]

    def test_subjective_missing_id(self, blur_corpus, bundle_path):
        with pytest.raises(FormatError):
            evaluate_corpus(
                blur_corpus, bundle_path, "relu1", subjective={"nope": 1.0}
            )

    def test_run_writes_deterministic_outputs(self, blur_corpus, bundle_path, tmp_path):
        d1, d2 = tmp_path / "r1", tmp_path / "r2"
        run_oqa(blur_corpus, bundle_path, "relu1", out_dir=d1)
        run_oqa(blur_corpus, bundle_path, "relu1", out_dir=d2)
        for name in ("oqa_scores.csv", "oqa_summary.csv"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()
        header = (d1 / "oqa_scores.csv").read_text().splitlines()[0]
        assert header == "image_id,objective,subjective,predicted"

    def test_summary_fields(self, blur_corpus, bundle_path, tmp_path):
        _, _, summary = run_oqa(
            blur_corpus, bundle_path, "relu1", kind=LossKind.P, out_dir=tmp_path
        )
        assert summary["metric"] == "P"
        assert summary["n"] == 6
        assert summary["srocc"] == 1.0
        assert summary["rmse"] >= 0.0 and -1.0 <= summary["lcc"] <= 1.0


class TestUniformMapFallback:
    def test_flat_reference_makes_attention_moot(self, bundle_path, tmp_path):
        # constant reference: its band-passed spectrum is empty, so the
        # attentive metric falls back to a uniform map and must agree
        # with the plain metric on every row
        src = tmp_path / "src"
        os.makedirs(src)
        save_image(luma_image(np.full((48, 48), 0.5)), src / "flat.png")
        specs = [
            DistortionSpec(DistortionKind.AWGN, s, 21)
            for s in (0.02, 0.05, 0.09, 0.14, 0.2, 0.3)
        ]
        out = tmp_path / "corpus"
        make_corpus(src, specs, out)
        manifest = out / "manifest.csv"
        plain = evaluate_corpus(manifest, bundle_path, "relu1", kind=LossKind.P)
        att = evaluate_corpus(manifest, bundle_path, "relu1", kind=LossKind.P_ATT)
        assert [r.objective for r in plain] == [r.objective for r in att]
        s1 = (rmse(fit_curve(plain), plain), lcc(fit_curve(plain), plain), srocc(plain))
        s2 = (rmse(fit_curve(att), att), lcc(fit_curve(att), att), srocc(att))
        assert s1 == s2
