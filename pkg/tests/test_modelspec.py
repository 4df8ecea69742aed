import json

import numpy as np
import pytest

from holoseries import ModelSpec, ModelSpecError, build_generator, models
from holoseries.modelspec import JumpDistribution

MODEL_DIR = __import__("pathlib").Path(__file__).resolve().parents[1] / "models"


@pytest.mark.parametrize("factory", [*models.CANONICAL.values(), models.affine_jump_1d,
                                     models.gaussian_2d, models.heston_like_2d, models.zero_model])
def test_json_roundtrip_idempotent(factory):
    spec = factory()
    text = spec.to_json(sort_keys=True)
    again = ModelSpec.from_json(text)
    assert again.to_json(sort_keys=True) == text
    g1, g2 = build_generator(spec), build_generator(again)
    assert np.array_equal(g1.c, g2.c) and np.array_equal(g1.d, g2.d)


@pytest.mark.parametrize("path", sorted(MODEL_DIR.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_model_files_load(path):
    spec = ModelSpec.load(path)
    build_generator(spec)


def _base():
    return models.brownian().to_dict()


def test_rejects_unknown_keys():
    doc = _base()
    doc["volatility_of_volatility"] = 1.0
    with pytest.raises(ModelSpecError, match="unsupported"):
        ModelSpec.from_dict(doc)


def test_rejects_bad_shape():
    doc = _base()
    doc["drift"]["linear"] = [1.0, 2.0]
    with pytest.raises(ModelSpecError, match="shape"):
        ModelSpec.from_dict(doc)


def test_rejects_asymmetric_diffusion():
    doc = models.gaussian_2d().to_dict()
    doc["diffusion"]["const"] = [[1.0, 0.5], [0.0, 1.0]]
    with pytest.raises(ModelSpecError, match="symmetric"):
        ModelSpec.from_dict(doc)


def test_rejects_box_without_origin():
    doc = _base()
    doc["domain_box"] = {"lo": [0.5], "hi": [1.0]}
    with pytest.raises(ModelSpecError, match="origin"):
        ModelSpec.from_dict(doc)


def test_rejects_invalid_json():
    with pytest.raises(ModelSpecError, match="invalid JSON"):
        ModelSpec.from_json("{not json")


def test_missing_moments_without_distribution():
    doc = models.compound_poisson().to_dict()
    del doc["jumps"]["distribution"]
    doc["jumps"]["moments"] = doc["jumps"]["moments"][:3]
    with pytest.raises(ModelSpecError, match="missing"):
        ModelSpec.from_dict(doc)


def test_negative_intensity_rejected():
    doc = models.affine_jump_1d().to_dict()
    doc["jumps"]["lambda0"] = 0.1
    doc["jumps"]["lambda1"] = [-1.0]
    with pytest.raises(ModelSpecError, match="negative"):
        build_generator(ModelSpec.from_dict(doc))


def test_non_psd_diffusion_rejected():
    doc = models.square_root().to_dict()
    doc["domain_box"] = {"lo": [-1.0], "hi": [1.0]}
    with pytest.raises(ModelSpecError, match="PSD"):
        build_generator(ModelSpec.from_dict(doc))


def test_atom_moments():
    dist = JumpDistribution.from_dict({"kind": "atoms", "points": [[1.0], [-2.0]], "weights": [0.25, 0.75]}, 1)
    assert dist.raw_moment((3,)) == pytest.approx(0.25 - 0.75 * 8)
    assert dist.first_moment == pytest.approx([-1.25])


def test_bad_weights():
    with pytest.raises(ModelSpecError, match="probability"):
        JumpDistribution.from_dict({"kind": "atoms", "points": [[1.0]], "weights": [0.5]}, 1)


def test_json_file_is_plain_json(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(models.ornstein_uhlenbeck().to_json())
    assert json.loads(p.read_text())["dimension"] == 1
    assert ModelSpec.load(p).drift_linear[0, 0] == -1.0
