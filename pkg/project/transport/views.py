# transport/views.py
from django.shortcuts import get_object_or_404
from rest_framework.decorators import api_view
from rest_framework.response import Response

from .models import RunRecord
from .serializers import RunRecordSerializer

# ===== 실행 기록 조회 (읽기 전용) =====


@api_view(['GET'])
def run_list(request):
    """실행 기록 목록. ?subcommand=, ?verdict= 로 거를 수 있습니다."""
    queryset = RunRecord.objects.all()
    subcommand = request.query_params.get('subcommand')
    if subcommand:
        queryset = queryset.filter(subcommand=subcommand)
    verdict = request.query_params.get('verdict')
    if verdict:
        queryset = queryset.filter(verdict=verdict)
    serializer = RunRecordSerializer(queryset, many=True)
    return Response(serializer.data)


@api_view(['GET'])
def run_detail(request, pk):
    """실행 기록 상세"""
    record = get_object_or_404(RunRecord, pk=pk)
    return Response(RunRecordSerializer(record).data)
