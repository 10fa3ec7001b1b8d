import sys

from heatstat.cli import main

# 환경 변수 로드는 heatstat.cli.main에서 처리

if __name__ == "__main__":
    sys.exit(main())
