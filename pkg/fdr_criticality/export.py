'''
Output writers.

Results are rendered in memory first and only then written.  Every file is
first written to a temporary file in the target directory; only once all of
them exist are they moved into place with :func:`os.replace`.  A run that
fails while computing or rendering, or while writing the temporary files,
leaves no output behind.

CSV files have a header row, ``%.17g`` floats, ``.`` decimals and LF line
endings; JSON files are indented and encoded with
:class:`fdr_criticality.schema.ResultJsonEncoder`.
'''
import io
import json
import logging
import os
import tempfile

from .schema import ResultJsonEncoder

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


def render_json(obj):
    return json.dumps(obj, cls=ResultJsonEncoder, indent=2, sort_keys=True,
                      allow_nan=False) + '\n'


def render_csv(frame):
    buffer_ = io.StringIO()
    frame.to_csv(buffer_, index=False, float_format=FLOAT_FORMAT,
                 lineterminator='\n', na_rep='nan')
    return buffer_.getvalue()


def _write_temporary(directory, text):
    handle, temp_path = tempfile.mkstemp(dir=directory, prefix='.',
                                         suffix='.tmp')
    try:
        with io.open(handle, 'w', encoding='utf-8', newline='\n') as output:
            output.write(text)
    except Exception:
        os.remove(temp_path)
        raise
    return temp_path


def _discard(temp_paths):
    for temp_path in temp_paths:
        if os.path.exists(temp_path):
            os.remove(temp_path)


def write_atomic(path, text):
    '''
    Write ``text`` to ``path`` through a temporary file and a rename.
    '''
    temp_path = _write_temporary(os.path.dirname(os.path.abspath(path)), text)
    try:
        os.replace(temp_path, path)
    except Exception:
        _discard([temp_path])
        raise
    logger.debug('Wrote `%s`.', path)


def write_outputs(directory, outputs):
    '''
    Write rendered outputs into ``directory``.

    Parameters
    ----------
    directory : str
        Created if missing.
    outputs : dict
        Maps file names to :class:`pandas.DataFrame` (written as CSV) or
        JSON-encodable objects.

    Returns
    -------
    list of str
        Paths written, in ``outputs`` order.
    '''
    # Render everything before touching the filesystem.
    rendered = [(name, render_csv(value) if hasattr(value, 'to_csv') else
                 render_json(value)) for name, value in outputs.items()]
    if not os.path.isdir(directory):
        os.makedirs(directory)
    # All temporary files exist before the first rename.
    temp_paths = []
    try:
        for _, text in rendered:
            temp_paths.append(_write_temporary(directory, text))
    except Exception:
        _discard(temp_paths)
        raise
    paths = [os.path.join(directory, name) for name, _ in rendered]
    try:
        for temp_path, path in zip(temp_paths, paths):
            os.replace(temp_path, path)
            logger.debug('Wrote `%s`.', path)
    finally:
        _discard(temp_paths)
    logger.info('Wrote %d file(s) to `%s`.', len(paths), directory)
    return paths
