"""refactorlab: detect refactoring-worthy code in a small Python-like language.

The package parses MiniPy source into ASTs, derives attributed code
graphs and maintainability metrics, and compares three detectors of
refactoring need: fixed threshold rules, a decision tree, and a graph
convolutional network trained with handwritten backpropagation.  A
synthetic corpus generator, an extract-method transform checked against a
reference interpreter, evaluation reports, and DOT/HTML visualization
round out the toolchain.
"""

__version__ = "0.1.0"
