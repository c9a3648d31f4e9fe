"""
WSGI config for the nonlocal transport project.

실행 기록 조회 API (/api/runs/) 와 admin 을 띄울 때만 씁니다.
계산은 manage.py 의 배치 명령으로 돌립니다.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'project.settings')

application = get_wsgi_application()
