"""End-to-end runs of the four subcommands on a tiny configuration."""

import json
from os import path

import jsonschema
import pytest

import particlepush
from communication.writer import read_jsonl

SCHEMA_DIR = path.join(path.dirname(path.abspath(__file__)), '..', 'schemas')
CONFIG_DIR = path.join(path.dirname(path.abspath(__file__)), '..', 'config')

TINY_CONFIG = """\
seed : 0
task:
    n_objects : 1
    horizon : 10
views:
    n_views : 2
net:
    kind : %(kind)s
    embed_dim : 8
    n_heads : 2
    ff_hidden : 16
    head_hidden : 16
    head_layers : 2
    mlp_hidden : 16
    mlp_layers : 2
train:
    batch_size : 8
    episodes_per_loop : 2
    total_env_steps : 40
    eval_interval : 20
    eval_goals : 2
    buffer_size : 500
    checkpoint_interval : 20
eval:
    n_objects : [1, 2]
    episodes : 2
audit:
    episodes : 3
theory:
    M_values : [2]
    gammas : [0.9]
    n_specs : 2
    trials : 10
    premise_samples : 500
    deepsets_n_max : 3
    deepsets_specs : 2
    deepsets_trials : 10
    counterexample_n_max : 4
    counterexample_specs : 3
    lemma_trials : 50
"""


def schema(name):
    with open(path.join(SCHEMA_DIR, name + '.schema.json')) as handle:
        return json.load(handle)


def load(file_name):
    with open(file_name) as handle:
        return json.load(handle)


def write_config(directory, kind='eit', extra=''):
    file_name = directory / ('tiny_%s.yml' % kind)
    file_name.write_text(TINY_CONFIG % {'kind': kind} + extra)
    return str(file_name)


@pytest.fixture(scope='module')
def trained(tmp_path_factory):
    base = tmp_path_factory.mktemp('train')
    config = write_config(base)
    out = base / 'run'
    assert particlepush.main(['train', '--config', config, '--out', str(out)]) == 0
    return config, out


def test_train_outputs(trained):
    _, out = trained
    records = read_jsonl(str(out / 'metrics.jsonl'))
    assert [r['env_steps'] for r in records] == [20, 40]
    for record in records:
        jsonschema.validate(record, schema('metrics_record'))
    summary = load(str(out / 'summary.json'))
    jsonschema.validate(summary, schema('summary'))
    assert summary['env_steps'] == 40 and summary['evaluations'] == 2 and not summary['stopped']
    names = sorted(p.name for p in (out / 'checkpoints').iterdir())
    assert names == ['last.ckpt', 'step_00000020.ckpt', 'step_00000040.ckpt']


def test_train_is_reproducible(trained, tmp_path):
    config, out = trained
    again = tmp_path / 'again'
    assert particlepush.main(['train', '--config', config, '--out', str(again)]) == 0
    assert (again / 'metrics.jsonl').read_bytes() == (out / 'metrics.jsonl').read_bytes()
    assert (again / 'summary.json').read_bytes() == (out / 'summary.json').read_bytes()


def test_eval_sweep(trained, tmp_path):
    config, out = trained
    code = particlepush.main(['eval', '--config', config, '--checkpoint', str(out / 'checkpoints' / 'last.ckpt'),
                              '--out', str(tmp_path)])
    assert code == 0
    report = load(str(tmp_path / 'eval.json'))
    jsonschema.validate(report, schema('eval_report'))
    assert [row['n_objects'] for row in report['rows']] == [1, 2]
    assert report['checkpoint'] == 'last.ckpt'
    assert len((tmp_path / 'eval.csv').read_text().splitlines()) == 3
    for n, horizon in ((1, 30), (2, 50)):
        steps = read_jsonl(str(tmp_path / 'trajectories' / ('plain_%d.jsonl' % n)))
        assert len(steps) == horizon
        for step in steps:
            jsonschema.validate(step, schema('trajectory_step'))


def test_eval_single_count(trained, tmp_path):
    config, out = trained
    code = particlepush.main(['eval', '--config', config, '--checkpoint', str(out / 'checkpoints' / 'last.ckpt'),
                              '--out', str(tmp_path), '--n-objects', '3'])
    assert code == 0
    assert [row['n_objects'] for row in load(str(tmp_path / 'eval.json'))['rows']] == [3]


def test_eval_needs_checkpoint(trained, tmp_path):
    config, _ = trained
    assert particlepush.main(['eval', '--config', config, '--out', str(tmp_path)]) == 2


def test_eval_missing_checkpoint(trained, tmp_path):
    config, _ = trained
    code = particlepush.main(['eval', '--config', config, '--checkpoint', str(tmp_path / 'none.ckpt'),
                              '--out', str(tmp_path)])
    assert code == 4


def test_unstructured_refuses_other_counts(tmp_path):
    config = write_config(tmp_path, kind='unstructured')
    out = tmp_path / 'run'
    assert particlepush.main(['train', '--config', config, '--out', str(out)]) == 0
    code = particlepush.main(['eval', '--config', config, '--checkpoint', str(out / 'checkpoints' / 'last.ckpt'),
                              '--out', str(tmp_path / 'eval')])
    assert code == 4


def test_verify_theory(tmp_path):
    config = write_config(tmp_path)
    assert particlepush.main(['verify-theory', '--config', config, '--out', str(tmp_path / 'theory')]) == 0
    for name in particlepush.THEORY_REPORTS:
        report = load(str(tmp_path / 'theory' / (name + '.json')))
        jsonschema.validate(report, schema('theory_report'))
        assert report['report'] == name and report['violations'] == 0 and report['rows']


def test_verify_theory_fault_injection(tmp_path):
    config = write_config(tmp_path, extra='    fault : yes\n')
    assert particlepush.main(['verify-theory', '--config', config, '--out', str(tmp_path / 'theory')]) == 1
    assert load(str(tmp_path / 'theory' / 'theorem1.json'))['violations'] > 0


def test_reward_audit(tmp_path):
    config = write_config(tmp_path)
    code = particlepush.main(['reward-audit', '--config', config, '--out', str(tmp_path / 'audit')])
    stats = load(str(tmp_path / 'audit' / 'audit_stats.json'))
    jsonschema.validate(stats, schema('audit_stats'))
    assert code == (0 if stats['passed'] else 1)
    assert stats['rows'] == 3 * 10
    assert len((tmp_path / 'audit' / 'audit.csv').read_text().splitlines()) == 31


def test_malformed_config(tmp_path):
    config = tmp_path / 'broken.yml'
    config.write_text('task:\n    n_objectz : 2\n')
    assert particlepush.main(['train', '--config', str(config), '--out', str(tmp_path)]) == 2


@pytest.mark.slow
def test_reward_audit_correlation(tmp_path):
    out = tmp_path / 'audit'
    assert particlepush.main(['reward-audit', '--n-objects', '3', '--episodes', '20', '--out', str(out)]) == 0
    stats = load(str(out / 'audit_stats.json'))
    assert stats['rows'] >= 1000
    assert stats['rho_chamfer_gt'] >= 0.9
    assert stats['rho_chamfer_gt_occluded'] < stats['rho_chamfer_gt']


@pytest.mark.slow
def test_generalization_trend(tmp_path):
    out = tmp_path / 'run'
    config = path.join(CONFIG_DIR, 'desk-config.yml')
    assert particlepush.main(['train', '--config', config, '--n-objects', '3', '--out', str(out)]) == 0
    code = particlepush.main(['eval', '--config', config, '--checkpoint', str(out / 'checkpoints' / 'last.ckpt'),
                              '--episodes', '100', '--out', str(tmp_path / 'eval')])
    assert code == 0
    fit = load(str(tmp_path / 'eval' / 'eval.json'))['fit']
    assert fit['monotone_non_increasing']
    assert fit['r_squared'] >= 0.8
