"""
Maintenance scripts for the laboratory.
"""
