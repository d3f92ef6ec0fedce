"""
Validation of JSON documents into measures and Levy pairs.

Every document goes through a Django form: fields are cleaned one by one
(``clean_<field>``), then ``clean`` builds the domain object. ``save``
returns that object or raises ValidationError with every collected message.
"""

import json
import math
from pathlib import Path

import django
from django import forms
from django.conf import settings as django_settings
from django.forms.utils import ErrorDict

from .exceptions import FreeMultError, UnknownTag, ValidationError
from .id_laws import LevyPair
from .measures import (
    Atoms, DensityGrid, FreePoisson, MuAlphaBeta, Pareto, PointMass,
    PowerPushforward, SigmaMinFamily, SymmetricWrapper,
)

if not django_settings.configured:
    django_settings.configure(USE_I18N=False, USE_TZ=False, LOGGING_CONFIG=None)
    django.setup()

UNKNOWN_FAMILY = 'unknown_family'


def load_document(value):
    """Inline JSON text, a path to a JSON file, or an already decoded object"""
    if isinstance(value, (dict, list)):
        return value
    text = str(value).strip()
    if not text.startswith(('{', '[')):
        path = Path(text)
        if not path.is_file():
            raise ValidationError(f"'{text}' is neither JSON nor a readable file")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}")


class DocumentForm(forms.Form):
    """Form over a decoded JSON object whose ``save`` returns a domain object"""

    def full_clean(self):
        if self.is_bound and not isinstance(self.data, dict):
            self._errors = ErrorDict()
            self.cleaned_data = {}
            self.add_error(None, "expected a JSON object")
            return
        super().full_clean()

    def clean(self):
        cleaned_data = super().clean()
        if not self.errors:
            try:
                cleaned_data['result'] = self.build(cleaned_data)
            except FreeMultError as exc:
                raise forms.ValidationError(str(exc))
        return cleaned_data

    def build(self, data):
        raise NotImplementedError

    def error_message(self):
        parts = []
        for name, errors in sorted(self.errors.as_data().items()):
            messages = [m for error in errors for m in error.messages]
            parts.append(f"{name}: {'; '.join(messages)}")
        return ', '.join(parts)

    def save(self):
        if not self.is_valid():
            codes = [e.code for errors in self.errors.as_data().values() for e in errors]
            error = UnknownTag if UNKNOWN_FAMILY in codes else ValidationError
            raise error(self.error_message())
        return self.cleaned_data['result']

    # shared cleaners

    def _number(self, name, positive=False, nonnegative=False):
        if isinstance(self.data.get(name), bool):
            raise forms.ValidationError(f"{name} must be a number")
        value = self.cleaned_data[name]
        if positive and value <= 0:
            raise forms.ValidationError(f"{name} must be greater than 0.")
        if nonnegative and value < 0:
            raise forms.ValidationError(f"{name} cannot be negative.")
        return value


def _nested_measure(document):
    form = MeasureForm(document)
    if not form.is_valid():
        raise forms.ValidationError(form.error_message())
    return form.cleaned_data['result']


class ParetoForm(DocumentForm):
    alpha = forms.FloatField()

    def clean_alpha(self):
        return self._number('alpha', positive=True)

    def build(self, data):
        return Pareto(data['alpha'])


class PointMassForm(DocumentForm):
    a = forms.FloatField()

    def clean_a(self):
        return self._number('a', positive=True)

    def build(self, data):
        return PointMass(data['a'])


class FreePoissonForm(DocumentForm):

    def build(self, data):
        return FreePoisson()


class MuAlphaBetaForm(DocumentForm):
    alpha = forms.FloatField()
    beta = forms.FloatField()

    def clean_alpha(self):
        return self._number('alpha', nonnegative=True)

    def clean_beta(self):
        return self._number('beta', nonnegative=True)

    def build(self, data):
        return MuAlphaBeta(data['alpha'], data['beta'])


class SigmaMinForm(DocumentForm):
    c = forms.FloatField()
    d = forms.FloatField()
    alpha = forms.FloatField()

    def clean_c(self):
        return self._number('c', positive=True)

    def clean_d(self):
        return self._number('d', positive=True)

    def clean_alpha(self):
        return self._number('alpha', nonnegative=True)

    def build(self, data):
        return SigmaMinFamily(data['c'], data['d'], data['alpha'])


class AtomsForm(DocumentForm):
    atoms = forms.JSONField()

    def clean_atoms(self):
        atoms = self.cleaned_data['atoms']
        if not isinstance(atoms, list) or not atoms:
            raise forms.ValidationError("atoms must be a non-empty list of [location, weight]")
        pairs = []
        for item in atoms:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise forms.ValidationError(f"atom {item!r} is not a [location, weight] pair")
            try:
                pairs.append((float(item[0]), float(item[1])))
            except (TypeError, ValueError):
                raise forms.ValidationError(f"atom {item!r} is not numeric")
        return tuple(pairs)

    def build(self, data):
        return Atoms(data['atoms'])


def _float_list(value, name):
    if not isinstance(value, list):
        raise forms.ValidationError(f"{name} must be a list of numbers")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise forms.ValidationError(f"{name} must be a list of numbers")


class DensityGridForm(DocumentForm):
    nodes = forms.JSONField()
    values = forms.JSONField()
    tail = forms.JSONField(required=False)

    def clean_nodes(self):
        return _float_list(self.cleaned_data['nodes'], 'nodes')

    def clean_values(self):
        return _float_list(self.cleaned_data['values'], 'values')

    def clean_tail(self):
        tail = self.cleaned_data['tail']
        if tail is None:
            return ('none', 0.0)
        if not isinstance(tail, dict) or 'kind' not in tail:
            raise forms.ValidationError("tail must be {\"kind\": ..., \"rate\": ...}")
        if tail['kind'] not in DensityGrid.TAIL_KINDS:
            raise forms.ValidationError(f"unknown tail kind '{tail['kind']}'")
        try:
            return (tail['kind'], float(tail.get('rate', 0.0)))
        except (TypeError, ValueError):
            raise forms.ValidationError("tail rate must be a number")

    def build(self, data):
        kind, rate = data['tail']
        return DensityGrid(data['nodes'], data['values'], kind, rate)


class SymmetricForm(DocumentForm):
    inner = forms.JSONField()

    def clean_inner(self):
        return _nested_measure(self.cleaned_data['inner'])

    def build(self, data):
        return SymmetricWrapper(data['inner'])


class PushforwardForm(DocumentForm):
    inner = forms.JSONField()
    power = forms.FloatField()

    def clean_inner(self):
        return _nested_measure(self.cleaned_data['inner'])

    def clean_power(self):
        power = self._number('power')
        if power == 0:
            raise forms.ValidationError("power must be nonzero")
        return power

    def build(self, data):
        return PowerPushforward(data['inner'], data['power'])


FAMILY_FORMS = {
    'atoms': AtomsForm,
    'density_grid': DensityGridForm,
    'pareto': ParetoForm,
    'point_mass': PointMassForm,
    'free_poisson': FreePoissonForm,
    'mu_alpha_beta': MuAlphaBetaForm,
    'sigma_min': SigmaMinForm,
    'symmetric': SymmetricForm,
    'pushforward': PushforwardForm,
}


class MeasureForm(DocumentForm):
    """{"family": ..., "params": {...}}"""
    family = forms.CharField()
    params = forms.JSONField(required=False)

    def clean_family(self):
        family = self.cleaned_data['family']
        if family not in FAMILY_FORMS:
            raise forms.ValidationError(
                f"unknown measure family '{family}'", code=UNKNOWN_FAMILY)
        return family

    def clean_params(self):
        params = self.cleaned_data['params']
        if params is None:
            return {}
        if not isinstance(params, dict):
            raise forms.ValidationError("params must be a JSON object")
        return params

    def build(self, data):
        form = FAMILY_FORMS[data['family']](data['params'])
        if not form.is_valid():
            raise forms.ValidationError(form.error_message())
        return form.cleaned_data['result']


class LevyPairForm(DocumentForm):
    """{"gamma": ..., "sigma": <measure or null>, "atoms": {"zero": ..., "inf": ...}}"""
    gamma = forms.FloatField()
    sigma = forms.JSONField(required=False)
    atoms = forms.JSONField(required=False)

    def clean_gamma(self):
        return self._number('gamma')

    def clean_sigma(self):
        sigma = self.cleaned_data['sigma']
        return None if sigma is None else _nested_measure(sigma)

    def clean_atoms(self):
        atoms = self.cleaned_data['atoms'] or {}
        if not isinstance(atoms, dict):
            raise forms.ValidationError("atoms must be {\"zero\": ..., \"inf\": ...}")
        unknown = set(atoms) - {'zero', 'inf'}
        if unknown:
            raise forms.ValidationError(f"unknown atom keys {sorted(unknown)}")
        masses = {}
        for key in ('zero', 'inf'):
            value = atoms.get(key, 0.0)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise forms.ValidationError(f"atom mass at {key} must be a finite number")
            if value < 0:
                raise forms.ValidationError(f"atom mass at {key} cannot be negative.")
            masses[key] = float(value)
        return masses

    def build(self, data):
        return LevyPair(data['gamma'], data['sigma'],
                        zero_mass=data['atoms']['zero'], inf_mass=data['atoms']['inf'])


def parse_measure(value):
    return MeasureForm(load_document(value)).save()


def parse_levy_pair(value):
    return LevyPairForm(load_document(value)).save()


def dump_measure(mu):
    """Inverse of ``parse_measure`` for every serialisable family"""
    family = mu.family
    if isinstance(mu, Atoms):
        params = {'atoms': [list(a) for a in mu.atoms]}
    elif isinstance(mu, DensityGrid):
        params = {'nodes': list(mu.nodes), 'values': list(mu.values)}
        if mu.tail_kind != 'none':
            params['tail'] = {'kind': mu.tail_kind, 'rate': mu.tail_rate}
    elif isinstance(mu, Pareto):
        params = {'alpha': mu.alpha}
    elif isinstance(mu, PointMass):
        params = {'a': mu.a}
    elif isinstance(mu, FreePoisson):
        params = {}
    elif isinstance(mu, MuAlphaBeta):
        params = {'alpha': mu.alpha, 'beta': mu.beta}
    elif isinstance(mu, SigmaMinFamily):
        params = {'c': mu.c, 'd': mu.d, 'alpha': mu.alpha}
    elif isinstance(mu, SymmetricWrapper):
        params = {'inner': dump_measure(mu.inner)}
    elif isinstance(mu, PowerPushforward):
        params = {'inner': dump_measure(mu.inner), 'power': mu.power}
    else:
        raise ValidationError(f"{family} measures are not serialisable")
    return {'family': family, 'params': params}
