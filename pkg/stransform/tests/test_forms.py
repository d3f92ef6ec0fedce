import json

import pytest
from django import forms

from stransform.exceptions import UnknownTag, ValidationError
from stransform.forms import (
    FAMILY_FORMS, LevyPairForm, MeasureForm, dump_measure, load_document, parse_levy_pair,
    parse_measure,
)
from stransform.measures import (
    Atoms, DensityGrid, FreePoisson, Pareto, PowerPushforward, SigmaMinFamily, SymmetricWrapper,
)


class TestLoadDocument:

    def test_inline(self):
        assert load_document('{"a": 1}') == {'a': 1}

    def test_file(self, tmp_path):
        path = tmp_path / 'measure.json'
        path.write_text(json.dumps({'family': 'free_poisson'}))
        assert load_document(str(path)) == {'family': 'free_poisson'}

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            load_document(str(tmp_path / 'absent.json'))

    def test_invalid_json(self):
        with pytest.raises(ValidationError):
            load_document('{"a": }')


class TestMeasureForm:

    @pytest.mark.parametrize('document, expected', [
        ({'family': 'pareto', 'params': {'alpha': 2}}, Pareto(2.0)),
        ({'family': 'free_poisson'}, FreePoisson()),
        ({'family': 'atoms', 'params': {'atoms': [[1, 0.5], [2, 0.5]]}}, Atoms(((1.0, 0.5), (2.0, 0.5)))),
        ({'family': 'sigma_min', 'params': {'c': 1, 'd': 1, 'alpha': 1}}, SigmaMinFamily(1.0, 1.0, 1.0)),
        ({'family': 'symmetric', 'params': {'inner': {'family': 'pareto', 'params': {'alpha': 2}}}},
         SymmetricWrapper(Pareto(2.0))),
        ({'family': 'pushforward',
          'params': {'inner': {'family': 'pareto', 'params': {'alpha': 2}}, 'power': -1}},
         PowerPushforward(Pareto(2.0), -1.0)),
    ])
    def test_valid(self, document, expected):
        assert parse_measure(document) == expected

    def test_density_grid_with_tail(self):
        mu = parse_measure({'family': 'density_grid',
                            'params': {'nodes': [1, 2], 'values': [1, 1],
                                       'tail': {'kind': 'power', 'rate': 3}}})
        assert isinstance(mu, DensityGrid)
        assert mu.tail_kind == 'power'

    @pytest.mark.parametrize('document, field', [
        ({'family': 'gamma'}, 'family'),
        ({'params': {}}, 'family'),
        ({'family': 'pareto', 'params': {}}, 'alpha'),
        ({'family': 'pareto', 'params': {'alpha': -1}}, 'alpha'),
        ({'family': 'pareto', 'params': {'alpha': 'two'}}, 'alpha'),
        ({'family': 'pareto', 'params': {'alpha': True}}, 'alpha'),
        ({'family': 'pushforward', 'params': {'inner': {'family': 'free_poisson'}, 'power': 0}}, 'power'),
        ({'family': 'density_grid', 'params': {'nodes': [0, 1], 'values': [1, 1], 'tail': {'kind': 'cubic'}}},
         'tail'),
    ])
    def test_invalid(self, document, field):
        with pytest.raises(ValidationError, match=field):
            parse_measure(document)

    def test_errors_collected(self):
        form = MeasureForm({'family': 'sigma_min', 'params': {'c': -1, 'd': -1, 'alpha': 1}})
        assert not form.is_valid()
        assert 'c:' in form.errors['__all__'][0]
        assert 'd:' in form.errors['__all__'][0]

    def test_not_an_object(self):
        form = MeasureForm(['pareto'])
        assert not form.is_valid()

    def test_unknown_family_is_unknown_tag(self):
        with pytest.raises(UnknownTag, match="gamma"):
            parse_measure({'family': 'gamma'})

    def test_missing_field_uses_required_message(self):
        form = MeasureForm({'params': {}})
        assert not form.is_valid()
        assert form.errors['family'] == ['This field is required.']

    def test_non_numeric_tail_rate(self):
        with pytest.raises(ValidationError, match='rate'):
            parse_measure({'family': 'density_grid',
                           'params': {'nodes': [1, 2], 'values': [1, 1],
                                      'tail': {'kind': 'power', 'rate': 'fast'}}})

    def test_domain_errors_become_form_errors(self):
        form = MeasureForm({'family': 'density_grid', 'params': {'nodes': [1, 0], 'values': [1, 1]}})
        assert not form.is_valid()
        assert 'increasing' in form.errors['__all__'][0]

    @pytest.mark.parametrize('family', sorted(FAMILY_FORMS))
    def test_family_forms_are_django_forms(self, family):
        assert issubclass(FAMILY_FORMS[family], forms.Form)

    @pytest.mark.parametrize('mu', [
        Pareto(0.5),
        Atoms(((1.0, 0.25), (3.0, 0.75))),
        SymmetricWrapper(FreePoisson()),
        PowerPushforward(Pareto(2.0), 2.0),
    ], ids=lambda m: m.family)
    def test_dump_is_inverse(self, mu):
        assert parse_measure(dump_measure(mu)) == mu


class TestLevyPairForm:

    def test_valid(self):
        pair = parse_levy_pair('{"gamma": 0.5, "sigma": {"family": "sigma_min", '
                               '"params": {"c": 1, "d": 1, "alpha": 1}}, "atoms": {"inf": 2}}')
        assert pair.gamma == 0.5
        assert pair.sigma == SigmaMinFamily(1.0, 1.0, 1.0)
        assert pair.inf_mass == 2.0
        assert pair.zero_mass == 0.0

    def test_drift_only(self):
        pair = parse_levy_pair({'gamma': 0})
        assert pair.sigma is None

    @pytest.mark.parametrize('document', [
        {},
        {'gamma': 0, 'atoms': {'middle': 1}},
        {'gamma': 0, 'atoms': {'zero': -1}},
        {'gamma': 0, 'sigma': {'family': 'nope'}},
    ])
    def test_invalid(self, document):
        assert not LevyPairForm(document).is_valid()
        with pytest.raises(ValidationError):
            parse_levy_pair(document)
