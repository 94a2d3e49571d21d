'''
Example run configurations shipped with the package.
'''
import os

EXAMPLES_DIR = os.path.dirname(os.path.abspath(__file__))


def example_path(name):
    '''
    Absolute path of a shipped example configuration, e.g.,
    ``example_path('power_laplace.json')``.
    '''
    path = os.path.join(EXAMPLES_DIR, name)
    if not os.path.exists(path):
        raise ValueError('No example configuration `%s`.' % name)
    return path
