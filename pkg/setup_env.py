#!/usr/bin/env python3
"""
Interactive setup script for creating the .env file of the laboratory.
"""

import os
from pathlib import Path


def create_env_file():
    """Create .env file with user input."""
    print("Stable Girsanov Laboratory - environment setup")
    print("=" * 50)
    print("This script writes a .env file; press Enter to keep a default.\n")

    env_values = {}

    print("[ Compute ]")
    default_threads = str(os.cpu_count() or 1)
    env_values['THREADS'] = input(f"Worker threads (default: {default_threads}): ").strip() or default_threads
    env_values['MASTER_SEED'] = input("Default master seed (default: 20240601): ").strip() or "20240601"

    print("\n[ Output ]")
    env_values['OUTPUT_DIR'] = input("Output directory (default: output): ").strip() or "output"

    print("\n[ Logging ]")
    env_values['LOG_LEVEL'] = input("Log level (DEBUG/INFO/WARNING/ERROR, default: INFO): ").strip().upper() or "INFO"

    for key in ('THREADS', 'MASTER_SEED'):
        if not env_values[key].isdigit():
            print(f"{key} must be a non-negative integer, got '{env_values[key]}'")
            return

    env_content = """# Compute
THREADS={THREADS}
MASTER_SEED={MASTER_SEED}

# Output
OUTPUT_DIR={OUTPUT_DIR}

# Logging
LOG_LEVEL={LOG_LEVEL}
""".format(**env_values)

    if Path('.env').exists():
        overwrite = input("\n.env already exists. Overwrite? (y/N): ").strip().lower()
        if overwrite != 'y':
            print("Setup cancelled.")
            return

    with open('.env', 'w', encoding='utf-8') as f:
        f.write(env_content)

    Path(env_values['OUTPUT_DIR']).mkdir(parents=True, exist_ok=True)
    print("\n.env written.")
    print("Try 'python main.py validate --matrix minimal' next.")


if __name__ == "__main__":
    try:
        create_env_file()
    except KeyboardInterrupt:
        print("\n\nSetup cancelled.")
    except Exception as e:
        print(f"\nSetup failed: {e}")
