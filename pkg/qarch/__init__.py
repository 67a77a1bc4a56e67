"""
Reinforcement-learning search for parameterized quantum circuit architectures
"""
__VERSION__ = "0.3.0"
__version__ = __VERSION__
