from rest_framework import serializers

from .exceptions import TransportError
from .models import RunRecord
from .services.kernel import KernelSpec
from .services.mellin import check_theorem_hypotheses
from .services.solver import PRESETS, SolverConfig

# ===== 실행 설정 (명령행 + 설정 파일 + 프리셋 병합 결과) =====


def _spec_or_error(dim, alpha, require_kernel=True) -> KernelSpec:
    try:
        spec = KernelSpec(dim, alpha)
        if require_kernel:
            spec.require_kernel()
        return spec
    except TransportError as exc:
        raise serializers.ValidationError({'alpha': str(exc)})


class ManifestSerializer(serializers.Serializer):
    """모든 명령이 공유하는 필드"""
    output = serializers.CharField(required=False, allow_blank=False)
    force = serializers.BooleanField(default=False)
    config = serializers.CharField(required=False, allow_null=True)
    seed = serializers.IntegerField(default=42)


class KernelTableManifestSerializer(ManifestSerializer):
    """kernel_table: 커널 표와 계수 표"""
    dim = serializers.IntegerField(min_value=1)
    alpha = serializers.FloatField()
    r_max = serializers.FloatField(default=3.0, min_value=0.0)
    grid_n = serializers.IntegerField(default=301, min_value=2)
    n_coeffs = serializers.IntegerField(default=200, min_value=1)

    def validate(self, attrs):
        _spec_or_error(attrs['dim'], attrs['alpha'])
        return attrs


class CertifyManifestSerializer(ManifestSerializer):
    """certify: Re H > 0 격자 인증"""
    dim = serializers.IntegerField(min_value=1)
    alpha = serializers.FloatField()
    delta = serializers.FloatField(default=0.0)
    lambda_max = serializers.FloatField(default=1e3, min_value=0.0)
    lambda_points = serializers.IntegerField(default=2000, min_value=4)

    def validate(self, attrs):
        spec = _spec_or_error(attrs['dim'], attrs['alpha'])
        try:
            check_theorem_hypotheses(spec, attrs['delta'])
        except TransportError as exc:
            raise serializers.ValidationError({'delta': str(exc)})
        return attrs


class InequalityManifestSerializer(CertifyManifestSerializer):
    """inequality: 무작위 시험 함수 묶음에 대한 가중 부등식"""
    dim = serializers.IntegerField(min_value=1, default=2)
    alpha = serializers.FloatField(default=1.0)
    n_functions = serializers.IntegerField(default=20, min_value=1)
    grid_n = serializers.IntegerField(default=800, min_value=8)
    r_max = serializers.FloatField(default=10.0, min_value=0.0)
    tolerance = serializers.FloatField(default=1e-4, min_value=0.0)


class SimulateManifestSerializer(ManifestSerializer):
    """simulate: 프리셋 위에 덮어쓴 해석 설정"""
    preset = serializers.ChoiceField(choices=sorted(PRESETS), required=False, allow_null=True)
    dim = serializers.IntegerField(min_value=1, default=2)
    alpha = serializers.FloatField(default=1.0)
    delta = serializers.FloatField(required=False, allow_null=True)
    grid_n = serializers.IntegerField(default=400, min_value=8)
    r_max = serializers.FloatField(default=1.2, min_value=0.0)
    cutoff_L = serializers.FloatField(required=False, allow_null=True)
    cfl = serializers.FloatField(default=0.5)
    t_end = serializers.FloatField(required=False, allow_null=True)
    height = serializers.FloatField(default=1.0)
    radius = serializers.FloatField(default=1.0)
    threshold_factor = serializers.FloatField(default=100.0)
    blowup_threshold = serializers.FloatField(required=False, allow_null=True)
    output_stride = serializers.IntegerField(default=1, min_value=1)
    grid_strength = serializers.FloatField(default=4.0, min_value=0.0)
    refine = serializers.BooleanField(default=False)

    def validate(self, attrs):
        spec = _spec_or_error(attrs['dim'], attrs['alpha'], require_kernel=False)
        if spec.alpha > 2.0 or spec.alpha < 0.0 or (spec.d == 1 and spec.alpha == 0.0):
            _spec_or_error(attrs['dim'], attrs['alpha'])
        if not 0.0 < attrs['radius'] < 0.9 * attrs['r_max']:
            raise serializers.ValidationError({'radius': '반지름은 (0, 0.9 r_max) 안이어야 합니다'})
        if not attrs['height'] > 0:
            raise serializers.ValidationError({'height': '높이는 양수여야 합니다'})
        try:
            attrs['solver_config'] = SolverConfig(
                spec=spec, delta=attrs.get('delta'), grid_M=attrs['grid_n'], R_max=attrs['r_max'],
                L=attrs.get('cutoff_L'), cfl=attrs['cfl'], t_end=attrs.get('t_end'),
                blowup_grad_threshold=attrs.get('blowup_threshold'),
                threshold_factor=attrs['threshold_factor'], output_stride=attrs['output_stride'],
                grid_strength=attrs['grid_strength'],
            )
        except TransportError as exc:
            raise serializers.ValidationError({'config': str(exc)})
        return attrs


class BurgersOracleManifestSerializer(ManifestSerializer):
    """burgers_oracle: u_t + (u_r)^2 = 0 특성선 정확해"""
    height = serializers.FloatField(default=1.0)
    radius = serializers.FloatField(default=1.0)
    grid_n = serializers.IntegerField(default=2000, min_value=2)
    r_max = serializers.FloatField(default=1.2, min_value=0.0)
    fractions = serializers.ListField(
        child=serializers.FloatField(min_value=0.0), default=lambda: [0.25, 0.5, 0.75], allow_empty=False)

    def to_internal_value(self, data):
        data = dict(data)
        if isinstance(data.get('fractions'), str):
            data['fractions'] = [x for x in data['fractions'].replace(' ', '').split(',') if x]
        return super().to_internal_value(data)

    def validate_fractions(self, value):
        if any(f >= 1.0 for f in value):
            raise serializers.ValidationError('T* 비율은 1 보다 작아야 합니다 (충격 전 해)')
        return value

    def validate(self, attrs):
        if not 0.0 < attrs['radius'] < attrs['r_max']:
            raise serializers.ValidationError({'radius': '반지름은 (0, r_max) 안이어야 합니다'})
        if not attrs['height'] > 0:
            raise serializers.ValidationError({'height': '높이는 양수여야 합니다'})
        return attrs


# ===== 산출 JSON 스키마 =====

class CertificateSerializer(serializers.Serializer):
    """certificate.json"""
    dim = serializers.IntegerField(min_value=1)
    alpha = serializers.FloatField()
    delta = serializers.FloatField()
    positivity_constant = serializers.FloatField(allow_null=True)
    analytic_lower_bound = serializers.FloatField(allow_null=True)
    argmin_lambda = serializers.FloatField(min_value=0.0)
    grid_size = serializers.IntegerField(min_value=1)
    lambda_max = serializers.FloatField()
    passed = serializers.BooleanField()

    def validate(self, attrs):
        if attrs['passed'] and not (attrs['positivity_constant'] or 0.0) > 0:
            raise serializers.ValidationError('통과한 인증서의 양성 상수는 양수여야 합니다')
        return attrs


class RefinementSerializer(serializers.Serializer):
    coarse_M = serializers.IntegerField()
    fine_M = serializers.IntegerField()
    coarse_time = serializers.FloatField(allow_null=True)
    fine_time = serializers.FloatField(allow_null=True)
    shift = serializers.FloatField(allow_null=True)
    consistent = serializers.BooleanField()


class OdeCheckSerializer(serializers.Serializer):
    checked = serializers.BooleanField()
    reason = serializers.CharField(allow_blank=True)
    samples = serializers.IntegerField()
    fraction = serializers.FloatField(allow_null=True)
    increasing_fraction = serializers.FloatField(allow_null=True)
    passed = serializers.BooleanField()


class RunMetadataSerializer(serializers.Serializer):
    """simulate 의 metadata.json"""
    dim = serializers.IntegerField(min_value=1)
    alpha = serializers.FloatField()
    delta = serializers.FloatField()
    grid_n = serializers.IntegerField(min_value=2)
    r_max = serializers.FloatField()
    cutoff_L = serializers.FloatField()
    cfl = serializers.FloatField()
    t_end = serializers.FloatField()
    verdict = serializers.ChoiceField(choices=['completed', 'blowup'])
    monitored = serializers.ChoiceField(choices=['grad_sup', 'compression_sup'])
    threshold = serializers.FloatField(allow_null=True)
    C_tilde = serializers.FloatField(allow_null=True)
    predicted_T_star = serializers.FloatField(allow_null=True)
    detected_time = serializers.FloatField(allow_null=True)
    final_time = serializers.FloatField()
    steps = serializers.IntegerField(min_value=0)
    clamped_feet = serializers.IntegerField(min_value=0)
    samples = serializers.IntegerField(min_value=1)
    preset = serializers.CharField(allow_null=True, required=False)
    ode_check = OdeCheckSerializer(required=False, allow_null=True)
    gronwall_bounded = serializers.BooleanField(required=False, allow_null=True)
    refinement = RefinementSerializer(required=False, allow_null=True)
    # alpha = 2: 특성선 충격 시각과 검출 시각의 상대 차
    oracle_T_star = serializers.FloatField(required=False, allow_null=True)
    oracle_shift = serializers.FloatField(required=False, allow_null=True)

    def validate(self, attrs):
        if attrs['verdict'] == 'blowup' and attrs['detected_time'] is None:
            raise serializers.ValidationError('폭발 판정에는 검출 시각이 있어야 합니다')
        return attrs


# ===== 실행 기록 =====

class RunRecordSerializer(serializers.ModelSerializer):
    """실행 기록 조회용 Serializer"""
    class Meta:
        model = RunRecord
        fields = ['id', 'subcommand', 'manifest', 'verdict', 'exit_code', 'output_dir', 'summary', 'created_at']
        read_only_fields = fields
