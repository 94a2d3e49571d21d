import json

import pandas as pd
import pytest

from fdr_criticality import export
from fdr_criticality.export import render_csv, write_outputs


def test_write_outputs(tmp_path):
    frame = pd.DataFrame({'alpha': [0.1, 0.2], 'rho': [0., 1. / 3]})
    paths = write_outputs(str(tmp_path / 'out'),
                          {'table.csv': frame, 'result.json': {'a': 1}})
    assert [p.split('/')[-1] for p in paths] == ['table.csv', 'result.json']
    text = (tmp_path / 'out' / 'table.csv').read_text()
    assert text == render_csv(frame)
    assert text.splitlines()[2] == '0.20000000000000001,0.33333333333333331'
    assert json.loads((tmp_path / 'out' / 'result.json').read_text()) == \
        {'a': 1}
    assert sorted(p.name for p in (tmp_path / 'out').iterdir()) == \
        ['result.json', 'table.csv']


def test_failed_write_leaves_existing_outputs(tmp_path, monkeypatch):
    (tmp_path / 'first.json').write_text('old\n')
    calls = []
    write_temporary = export._write_temporary

    def fail_second(directory, text):
        calls.append(text)
        if len(calls) == 2:
            raise OSError('disk full')
        return write_temporary(directory, text)

    monkeypatch.setattr(export, '_write_temporary', fail_second)
    with pytest.raises(OSError):
        write_outputs(str(tmp_path), {'first.json': {'a': 1},
                                      'second.json': {'b': 2}})
    assert (tmp_path / 'first.json').read_text() == 'old\n'
    assert sorted(p.name for p in tmp_path.iterdir()) == ['first.json']
