import logging

LOG_LEVELS = ('critical', 'error', 'warning', 'info', 'debug', 'notset')


def log_level(name):
    '''
    Numeric :mod:`logging` level of a lower-case level name.
    '''
    return getattr(logging, name.upper())
