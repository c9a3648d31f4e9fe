from django.urls import path
from . import views

urlpatterns = [
    # === 실행 기록 ===
    path('runs/', views.run_list, name='run_list'),
    path('runs/<int:pk>/', views.run_detail, name='run_detail'),
]
