#!/usr/bin/env python3
"""
Main entry point for hopcrypt.
This file serves as a simple launcher for the command-line interface.
"""

if __name__ == "__main__":
    from hopcrypt.main import main
    main()
