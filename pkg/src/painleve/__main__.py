from painleve.cli import main

raise SystemExit(main())
