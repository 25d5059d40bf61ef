import json

import pytest

from genome.analysis.genepool import build_pool
from genome.analysis.metrics import corpus_metrics
from genome.analysis.profiles import C_LIKE
from genome.core.errors import CorruptIndex, IndexLocked, IndexVersionMismatch
from genome.db.index_store import GENES_FILE, LOCK_FILE, META_FILE, WINDOWS_FILE, load_pool, pool_lock, save_pool


@pytest.fixture
def pool(small_corpus):
    return build_pool(small_corpus, corpus_metrics(small_corpus.functions, C_LIKE), tau=1.0, jobs=1)


def test_save_then_load(tmp_path, pool):
    index = save_pool(pool, tmp_path / "index")
    loaded = load_pool(index)
    assert loaded == pool
    assert not (index / LOCK_FILE).exists()


def test_files_are_sorted_and_lf_terminated(tmp_path, pool):
    index = save_pool(pool, tmp_path / "index")
    raw = (index / GENES_FILE).read_bytes()
    assert b"\r\n" not in raw and raw.endswith(b"\n")
    fingerprints = [json.loads(line)["fingerprint"] for line in raw.decode("utf-8").splitlines()]
    assert fingerprints == sorted(fingerprints)
    hashes = [json.loads(line)["h"] for line in (index / WINDOWS_FILE).read_text(encoding="utf-8").splitlines()]
    assert hashes == sorted(hashes)


def test_saving_twice_is_byte_identical(tmp_path, pool):
    first = save_pool(pool, tmp_path / "one")
    second = save_pool(pool, tmp_path / "two")
    for path in sorted(first.iterdir()):
        assert path.read_bytes() == (second / path.name).read_bytes()


def test_version_mismatch(tmp_path, pool):
    index = save_pool(pool, tmp_path / "index")
    meta = json.loads((index / META_FILE).read_text(encoding="utf-8"))
    meta["format_version"] = 99
    (index / META_FILE).write_text(json.dumps(meta), encoding="utf-8")
    with pytest.raises(IndexVersionMismatch) as exc:
        load_pool(index)
    assert exc.value.found == 99


def test_missing_file_is_corrupt(tmp_path, pool):
    index = save_pool(pool, tmp_path / "index")
    (index / GENES_FILE).unlink()
    with pytest.raises(CorruptIndex) as exc:
        load_pool(index)
    assert exc.value.file.endswith(GENES_FILE)


def test_truncated_line_is_corrupt(tmp_path, pool):
    index = save_pool(pool, tmp_path / "index")
    with open(index / WINDOWS_FILE, "a", encoding="utf-8") as fh:
        fh.write('{"h": "00')
    with pytest.raises(CorruptIndex):
        load_pool(index)


def test_missing_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_pool(tmp_path / "nothing")


def test_second_writer_is_refused(tmp_path, pool):
    index = tmp_path / "index"
    index.mkdir()
    with pool_lock(index):
        with pytest.raises(IndexLocked):
            save_pool(pool, index)
    assert not (index / LOCK_FILE).exists()
    save_pool(pool, index)
