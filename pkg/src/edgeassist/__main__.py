from edgeassist.gateway.cli import main

main()
