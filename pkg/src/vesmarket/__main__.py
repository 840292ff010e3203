from vesmarket.cli import main

raise SystemExit(main())
