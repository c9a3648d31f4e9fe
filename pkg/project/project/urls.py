"""
URL configuration for the nonlocal transport project.

admin 과 실행 기록 조회 API (/api/runs/) 만 노출합니다.
"""
from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path('admin/', admin.site.urls),
    path("api/", include("transport.urls")),
]
