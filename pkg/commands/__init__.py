"""
Command package for the laboratory CLI.
Each module registers one sub-command through its `setup` function.
"""

COMMAND_MODULES = [
    "commands.run_command",
    "commands.validate_command",
    "commands.tables_command",
]
