import argparse
import logging
import sys
import time

from . import const
from .oracles import OracleDomainError, limit_price
from .pack import ConfigParseError, ConfigUnpacker, ConfigValidationError, ReportPacker
from .pricer import ConvergenceError, price_bccfva, price_bccva

logger = logging.getLogger(__package__)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xva-price",
        description="Price a collateralised deal with default and funding costs by least-squares Monte Carlo.")
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--mode", choices=const.RUN_MODES, default=None,
                        help="bccva, bccfva, fva or oracle (overrides the config)")
    parser.add_argument("--seed", type=int, default=None, help="Monte Carlo seed (overrides the config)")
    parser.add_argument("--paths", type=int, default=None, help="number of paths (overrides the config)")
    parser.add_argument("--workers", type=int, default=None, help="simulation threads (overrides the config)")
    parser.add_argument("--output", default=None, help="report file, stdout when omitted")
    parser.add_argument("--format", choices=const.REPORT_FORMATS, default=None, help="report format")
    parser.add_argument("--verbose", action="store_true", help="debug logging to stderr")
    return parser


def load_config(path, overrides=None):
    try:
        with open(path, "r") as fp:
            data = fp.read()
    except (IOError, OSError) as e:
        raise ConfigParseError("cannot read configuration %s: %s" % (path, e))
    return ConfigUnpacker(data).unpack_config(overrides)


def run(config):
    packer = ReportPacker(config)
    start = time.perf_counter()
    if config.mode == const.MODE_ORACLE:
        if config.limit_case is None:
            raise ConfigValidationError("oracle mode needs flat rate and hazard curves")
        grid = config.grid if config.document["oracle"]["discrete"] else None
        value = limit_price(config.limit_case, config.deal, grid)
        return packer.pack_oracle(value, time.perf_counter() - start)

    scenarios = config.simulate()
    logger.info("simulated %r", scenarios)
    if config.mode == const.MODE_BCCVA:
        result = price_bccva(scenarios, config.deal, config.csa, degree=config.basis_degree)
    else:
        result = price_bccfva(scenarios, config.deal, config.csa, config.policy, degree=config.basis_degree)
    logger.info("priced %r", result)
    return packer.pack_result(result, time.perf_counter() - start)


def write_report(report, path=None, fmt=const.FORMAT_JSON):
    body = ReportPacker.get_csv(report) if fmt == const.FORMAT_CSV else ReportPacker.get_json(report)
    if path is None:
        sys.stdout.write(body)
        return
    with open(path, "w") as fp:
        fp.write(body)


def exit_code(error):
    if isinstance(error, ConfigParseError):
        return const.EXIT_PARSE_ERROR
    if isinstance(error, ConvergenceError):
        return const.EXIT_CONVERGENCE_ERROR
    if isinstance(error, (ConfigValidationError, OracleDomainError, ValueError)):
        return const.EXIT_VALIDATION_ERROR
    return const.EXIT_FAILURE


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    overrides = {"mode": args.mode, "mc.seed": args.seed, "mc.paths": args.paths, "mc.workers": args.workers,
                 "output.path": args.output, "output.format": args.format}
    try:
        config = load_config(args.config, overrides)
        report = run(config)
        write_report(report, config.output_path, config.output_format)
    except Exception as e:
        code = exit_code(e)
        if code == const.EXIT_FAILURE:
            logger.exception("pricing failed")
        else:
            logger.error("%s: %s", const.EXITSTAT[code], e)
        sys.stderr.write(ReportPacker.get_json(ReportPacker.pack_error(e, code)))
        return code
    return const.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
