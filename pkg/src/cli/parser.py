"""
Argument parser for the asma command
"""
import argparse
import sys

EPILOG = """
Examples:
  python main.py data synth --classes 4 --per-class 50 --frames 50 --seed 1 -o data/
  python main.py data stats data/synthetic.asma
  python main.py mask preview --mode hdsm --n 9 --k 10 --seed 3 data/synthetic.asma
  python main.py pretrain -c config/desk.json -o runs/pre
  python main.py probe -c config/desk.json --from runs/pre -o runs/probe
  python main.py finetune -c config/desk.json --from runs/pre -o runs/ft
  python main.py distill -c config/desk.json --teacher runs/probe -o runs/kd --tau-sweep
  python main.py eval-3s --joint runs/j --bone runs/b --motion runs/m
  python main.py ablate-masks -c config/desk.json -o runs/ablation
  python main.py model info runs/pre/encoder_theta.ckpt

Exit codes:
  0  success
  1  usage or configuration error
  2  data error (unreadable or inconsistent input)
  3  numeric failure (non-finite loss, shape mismatch)
"""


class AsmaArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_run_options(p: argparse.ArgumentParser, default_out: str):
    p.add_argument('-c', '--config', default=None, help='JSON preset (default: built-in full-scale values)')
    p.add_argument('-o', '--out', default=default_out, help=f'Run directory (default: {default_out})')
    p.add_argument('--force', action='store_true', help='Overwrite an existing run directory')
    p.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                   help='Override a config field by dotted key (repeatable)')
    p.add_argument('--seed', type=int, default=None, help='Experiment seed')
    p.add_argument('--epochs', type=int, default=None, help="Epochs of this command's stage(s)")
    p.add_argument('--data', default=None, help='Dataset path, or "synthetic"')
    p.add_argument('--stream', choices=('joint', 'bone', 'motion'), default=None, help='Input stream')
    p.add_argument('--no-center', action='store_true', help='Correlate un-centered projections')
    p.add_argument('--align-norm', action='store_true', help='Normalize fused tokens before pooling')


def int_list(text: str):
    return [int(v) for v in text.split(',') if v.strip()]


def float_list(text: str):
    return [float(v) for v in text.split(',') if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = AsmaArgumentParser(
        prog='asma',
        description='Asymmetric spatio-temporal masking for skeleton representation learning',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    parser.add_argument('--verbose', action='store_true', help='Debug logging')
    sub = parser.add_subparsers(dest='command', metavar='command', parser_class=AsmaArgumentParser)
    sub.required = True

    # data
    data = sub.add_parser('data', help='Dataset tools')
    data_sub = data.add_subparsers(dest='data_command', metavar='action', parser_class=AsmaArgumentParser)
    data_sub.required = True
    stats = data_sub.add_parser('stats', help='Per-joint degree and mean motion as CSV')
    stats.add_argument('path', help='Dataset (cache, .skeleton file/directory, or "synthetic")')
    stats.add_argument('--frames', type=int, default=50, help='Frames per sequence (default: 50)')
    stats.add_argument('--body', choices=('first', 'all'), default='first')
    stats.add_argument('--seed', type=int, default=0, help='Seed for "synthetic"')
    stats.add_argument('-o', '--out', default=None, help='Write CSV here instead of stdout')
    synth = data_sub.add_parser('synth', help='Generate the synthetic dataset cache')
    synth.add_argument('--classes', type=int, default=4)
    synth.add_argument('--per-class', type=int, default=50)
    synth.add_argument('--frames', type=int, default=50)
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('-o', '--out', required=True, help='Output directory (writes synthetic.asma)')
    cache = data_sub.add_parser('cache', help='Convert .skeleton files into a dataset cache')
    cache.add_argument('path', help='.skeleton file or directory')
    cache.add_argument('--frames', type=int, default=50)
    cache.add_argument('--body', choices=('first', 'all'), default='first')
    cache.add_argument('-o', '--out', required=True, help='Cache file to write')

    # mask preview
    mask = sub.add_parser('mask', help='Masking tools')
    mask_sub = mask.add_subparsers(dest='mask_command', metavar='action', parser_class=AsmaArgumentParser)
    mask_sub.required = True
    preview = mask_sub.add_parser('preview', help='Print chosen joints/frames as JSON lines')
    preview.add_argument('dataset', help='Dataset (cache, .skeleton file/directory, or "synthetic")')
    preview.add_argument('--mode', choices=('hdsm', 'ldsm', 'hmtm', 'lmtm'), required=True)
    preview.add_argument('--n', type=int, default=9, help='Joints to mask (default: 9)')
    preview.add_argument('--k', type=int, default=10, help='Frames to mask (default: 10)')
    preview.add_argument('--seed', type=int, default=0)
    preview.add_argument('--frames', type=int, default=50)
    preview.add_argument('--limit', type=int, default=None, help='Only the first N sequences')
    preview.add_argument('--png', default=None, help='Also render the first sequence to this PNG')

    # stages
    pre = sub.add_parser('pretrain', help='Pretrain both encoders')
    _add_run_options(pre, 'runs/pretrain')
    probe = sub.add_parser('probe', help='Linear probe on frozen encoders')
    _add_run_options(probe, 'runs/probe')
    probe.add_argument('--from', dest='from_run', default=None, help='Pretrain run directory')
    probe.add_argument('--random-init', action='store_true', help='Probe randomly initialized encoders')
    probe.add_argument('--single', action='store_true', help='One linear head per encoder instead of alignment')
    ft = sub.add_parser('finetune', help='Fine-tune encoders, then train alignment')
    _add_run_options(ft, 'runs/finetune')
    ft.add_argument('--from', dest='from_run', required=True, help='Pretrain run directory')
    kd = sub.add_parser('distill', help='Distill the teacher into the compact student')
    _add_run_options(kd, 'runs/distill')
    kd.add_argument('--teacher', required=True, help='Probe or fine-tune run directory')
    kd.add_argument('--tau', type=float, default=None, help='Temperature')
    kd.add_argument('--student-tau', type=float, default=None, help='Separate student temperature')
    kd.add_argument('--mode', choices=('logit_kl', 'feature_cosine'), default=None)
    kd.add_argument('--tau-sweep', nargs='?', const='', default=None, type=str, metavar='T1,T2,...',
                    help='Distill once per temperature (default grid from the config)')
    kd.add_argument('--student-layers-sweep', nargs='?', const='', default=None, type=str, metavar='L1,L2,...',
                    help='Distill once per student depth (default grid from the config)')

    ev = sub.add_parser('eval', help='Held-out accuracy of a finished run')
    ev.add_argument('run', help='Probe, fine-tune or distill run directory')
    ev.add_argument('--data', default=None, help='Evaluate on another dataset')
    ev3 = sub.add_parser('eval-3s', help='Fuse joint, bone and motion runs')
    ev3.add_argument('--joint', required=True)
    ev3.add_argument('--bone', required=True)
    ev3.add_argument('--motion', required=True)
    ev3.add_argument('--data', default=None)

    ab = sub.add_parser('ablate-masks', help='Spatial x temporal masking grid')
    _add_run_options(ab, 'runs/ablate-masks')
    ab.add_argument('--seeds', type=int_list, default=None, help='Comma-separated seeds (default: --seed)')
    ac = sub.add_parser('ablate-counts', help='Masked joint/frame count grid')
    _add_run_options(ac, 'runs/ablate-counts')
    ac.add_argument('--joints', type=int_list, default=None, help='Comma-separated joint counts')
    ac.add_argument('--frames', type=int_list, default=None, help='Comma-separated frame counts')
    ac.add_argument('--seeds', type=int_list, default=None)
    seeds = sub.add_parser('seeds', help='Repeat a stage over seeds')
    _add_run_options(seeds, 'runs/seeds')
    seeds.add_argument('--stage', choices=('pretrain', 'probe', 'finetune', 'distill'), default='probe',
                       help='Stage to repeat, trained with the stages it builds on (default: probe)')
    seeds.add_argument('--seeds', dest='seed_list', type=int_list, default=None,
                       help='Comma-separated seeds (default: experiments.seeds)')

    model = sub.add_parser('model', help='Model tools')
    model_sub = model.add_subparsers(dest='model_command', metavar='action', parser_class=AsmaArgumentParser)
    model_sub.required = True
    info = model_sub.add_parser('info', help='Parameter and FLOP counts of a checkpoint')
    info.add_argument('checkpoint')
    info.add_argument('--frames', type=int, default=50, help='Input frames for FLOP counting')
    return parser


__all__ = ['build_parser', 'AsmaArgumentParser', 'float_list', 'int_list']
