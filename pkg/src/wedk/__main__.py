from .wedcli import main

main()
