from dotchains.cli import main

main()
