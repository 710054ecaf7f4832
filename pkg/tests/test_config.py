import pytest

from sacmil.config import load_config, parse_config
from sacmil.errors import ConfigError

TEXT = """
# tiny run
d_in = 32
dim = 32
k = 8
lambda = 256   # scaling factor
encoder = rope2d
residual = no
lr = 0.001
epochs = 3
manifest = data/manifest.csv
"""


def test_parse():
    run = parse_config(TEXT)
    assert (run.model.d_in, run.model.dim, run.model.k, run.model.lam) == (32, 32, 8, 256.0)
    assert run.model.encoder == "rope2d"
    assert run.model.residual is False
    assert run.model.blocks == 3
    assert (run.hyper.lr, run.hyper.epochs, run.hyper.seed) == (0.001, 3, 0)
    assert run.manifest == "data/manifest.csv" and run.out is None


def test_round_trip(tmp_path):
    run = parse_config(TEXT)
    (tmp_path / "c.cfg").write_text(run.to_text())
    assert load_config(tmp_path / "c.cfg") == run


@pytest.mark.parametrize(
    "text,match",
    [
        ("d_in = 4\nwidth = 3\n", "unknown key"),
        ("d_in = 4\nd_in = 5\n", "duplicate"),
        ("dim = 8\n", "d_in"),
        ("d_in = four\n", "bad value"),
        ("d_in = 4\njust words\n", "key = value"),
        ("d_in = 4\ndim = 30\nk = 4\n", "divisible"),
        ("d_in = 4\nresidual = maybe\n", "bad value for residual"),
    ],
)
def test_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)
