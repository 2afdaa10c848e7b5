"""
Utils package for the laboratory.
Contains logging setup and report writing helpers.
"""

from .helpers import *
