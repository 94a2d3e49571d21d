'''
Multiple-testing laboratory: p-value mixture models, criticality of the
Benjamini-Hochberg procedure, null-proportion estimators and their
asymptotic laws, checked against Monte Carlo simulation.
'''
__version__ = '0.1.0'
