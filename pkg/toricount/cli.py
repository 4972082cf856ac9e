import json
import os
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import click

from toricount import __version__, census, cox3
from toricount.config import Config, ConfigError, ConfigLoader
from toricount.fanfile import FanFile, FanFileError
from toricount.forms import BudgetError
from toricount.lattice import LatticeError
from toricount.logger import LogLevel, default_log_path, get_logger, setup_logging
from toricount.lpoly import LPoly, LPolyError, TailSeries, virtual_dim
from toricount.moebius import MoebiusError, check_class_identity, mu_aggregate_fq, mu_motivic
from toricount.motivic import SeriesError
from toricount.suites import SUITE_NAMES, SuiteParams, run_suite
from toricount.toric import CATALOG_NAMES, FanValidationError, ToricError, ToricVariety, catalog, check_exactness

DEFAULT_CONFIG_TEMPLATE = """# toricount configuration
defaults:
  # 有限域的阶 q (素数)
  q: 2

  # 暴力枚举的访问上限，超出时报错 (verify 中记为 skip)
  budget: 100000000

  # 暴力枚举使用的进程数
  jobs: 1

  # Möbius 级数的截断总次数
  max_total_degree: 8

  # c_mot 展开的精度 (L 的最低保留指数)
  precision: -8

  # 插值使用的素数
  primes: [2, 3, 5, 7, 11, 13]

  # zeta 表格的最大高度
  max_height: 12

  # 输出格式: tsv 或 json
  output: "tsv"

profiles:
  # === 配置示例 ===
  quick:
    budget: 1000000
    max_height: 8

  # 更大的素数与并行枚举
  # heavy:
  #   q: 3
  #   jobs: 4
  #   budget: 1000000000
"""

# exceptions that report a semantic failure (exit 1); parse and usage problems exit 2
SEMANTIC_ERRORS = (
    FanValidationError,
    ToricError,
    BudgetError,
    census.CensusError,
    cox3.Cox3Error,
    MoebiusError,
    SeriesError,
    LPolyError,
    LatticeError,
)

# count and cox3 rows; classes are rendered as sparse exponent:coefficient pairs
REPORT_COLUMNS = ("y", "q", "count", "dim", "leading", "class")


def _init_config():
    """Initialize .toricount/config.yaml in current directory."""
    config_dir = os.path.join(os.getcwd(), ".toricount")
    config_file = os.path.join(config_dir, "config.yaml")

    if os.path.exists(config_file):
        click.secho(f"Configuration already exists at {config_file}", fg="yellow")
        return

    if not os.path.exists(config_dir):
        os.makedirs(config_dir)
        click.echo(f"Created directory: {config_dir}")

    with open(config_file, "w") as f:
        f.write(DEFAULT_CONFIG_TEMPLATE)

    click.secho(f"Created configuration: {config_file}", fg="green")
    click.echo("Please edit it to match your computations.")


def _fail(message: str, code: int = 1):
    get_logger().error(message, module="toricount.cli")
    click.secho(message, fg="red", err=True)
    sys.exit(code)


def _render(value: Any) -> str:
    if isinstance(value, (tuple, list)):
        return ",".join(_render(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, (LPoly, TailSeries)):
        return value.render_sparse()
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else value.numerator
    if isinstance(value, (LPoly, TailSeries)):
        return value.render_sparse()
    return value


def _emit(rows: List[Dict[str, Any]], columns: Sequence[str], as_json: bool, title: Optional[str] = None):
    if as_json:
        click.echo(json.dumps([{c: _jsonable(row.get(c)) for c in columns} for row in rows], ensure_ascii=False))
        return
    if sys.stdout.isatty():
        from rich.console import Console
        from rich.table import Table

        table = Table(title=title)
        for c in columns:
            table.add_column(c)
        for row in rows:
            table.add_row(*(_render(row.get(c)) for c in columns))
        Console().print(table)
        return
    click.echo("\t".join(columns))
    for row in rows:
        click.echo("\t".join(_render(row.get(c)) for c in columns))


def _parse_vector(text: str, what: str) -> List[int]:
    try:
        return [int(part) for part in text.replace(" ", "").split(",") if part != ""]
    except ValueError:
        raise click.BadParameter(f"{what} must be comma-separated integers, got '{text}'")


def _load_variety(fan_path: Optional[str], catalog_name: Optional[str]) -> ToricVariety:
    if bool(fan_path) == bool(catalog_name):
        raise click.UsageError("give exactly one of --fan and --catalog")
    if fan_path:
        fan = FanFile.load(fan_path).to_fan()
    else:
        fan = catalog(catalog_name)
    return ToricVariety(fan)


def _degree(X: ToricVariety, text: str) -> tuple:
    """Full Z^I vector, or Pic-dual coordinates extended through the divisor classes; '0' is the zero class."""
    values = _parse_vector(text, "--degree")
    if values == [0]:
        return (0,) * X.num_rays
    if len(values) == X.num_rays:
        return tuple(values)
    if len(values) == X.pic_rank:
        return X.degree_from_pic_dual(values)
    raise click.BadParameter(f"--degree needs {X.num_rays} or {X.pic_rank} entries, got {len(values)}")


def _settings(ctx: click.Context) -> Config:
    return ctx.obj["config"]


def _want_json(ctx: click.Context, flag: bool) -> bool:
    if flag:
        return True
    try:
        return _settings(ctx).get_output() == "json"
    except ConfigError as e:
        _fail(f"Configuration Error: {e}", 2)


def _run_guarded(fn):
    try:
        return fn()
    except (FanFileError, ConfigError) as e:
        _fail(f"Error: {e}", 2)
    except SEMANTIC_ERRORS as e:
        _fail(f"Error: {e}", 1)


fan_options = [
    click.option("--fan", "fan_path", type=click.Path(), help="Fan file (JSON with name, rays, max_cones)"),
    click.option("--catalog", "catalog_name", help=f"Catalog variety: {', '.join(CATALOG_NAMES)}"),
]


def with_fan(fn):
    for option in reversed(fan_options):
        fn = option(fn)
    return fn


@click.group(invoke_without_command=True)
@click.version_option(version=__version__, prog_name="toricount", help="Show version and exit.")
@click.option("--init", is_flag=True, help="Initialize a configuration file in current directory")
@click.option("--config", "config_path", type=click.Path(), help="Path to configuration file")
@click.option("-p", "--profile", help="Configuration profile name")
@click.option("--enable-log", is_flag=True, help="Enable logging to file")
@click.option("--log-level", default="INFO", help="Log level (DEBUG/INFO/WARNING/ERROR)")
@click.option("--log-file", help="Path to log file (default: ./.toricount/logs/toricount_YYYYMMDD_HHMMSS.log)")
@click.pass_context
def cli(ctx, init, config_path, profile, enable_log, log_level, log_file):
    """toricount: count rational curves on toric varieties over finite fields and in L."""
    if enable_log:
        log_file = log_file or default_log_path()
        try:
            level = LogLevel.from_string(log_level)
            setup_logging(log_file, level)
        except ValueError:
            click.secho(f"Warning: Invalid log level '{log_level}', using INFO", fg="yellow")
            setup_logging(log_file, LogLevel.INFO)

    logger = get_logger()

    if init:
        _init_config()
        logger.info("Initialized configuration file", module="toricount.cli")
        return

    loader = ConfigLoader(config_path)
    try:
        if loader.exists():
            config = loader.load(profile_name=profile)
            logger.info(f"Loaded configuration {loader.config_path}, profile: {config.profile}", module="toricount.config")
        elif config_path or profile:
            raise ConfigError(f"Configuration file not found at: {loader.config_path}")
        else:
            config = Config.builtin()
    except ConfigError as e:
        _fail(f"Configuration Error: {e}", 2)

    ctx.ensure_object(dict)
    ctx.obj["config"] = config

    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


@cli.command("catalog")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON array instead of TSV")
@click.pass_context
def catalog_cmd(ctx, as_json):
    """List the built-in varieties."""
    rows = []
    for name in CATALOG_NAMES:
        # the Hirzebruch family is listed through its a = 1 member with the parameter written out
        fan = catalog("Fa(1)" if name == "Fa(a)" else name)
        rays = " ".join("(" + ",".join(str(c) for c in r) + ")" for r in fan.rays)
        if name == "Fa(a)":
            rays = rays.replace("(-1,1)", "(-1,a)")
        rows.append({"name": name, "dim": fan.dim, "pic_rank": len(fan.rays) - fan.dim, "rays": rays})
    _emit(rows, ["name", "dim", "pic_rank", "rays"], _want_json(ctx, as_json), "catalog")


@cli.command()
@click.argument("path", type=click.Path())
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON array instead of TSV")
@click.pass_context
def validate(ctx, path, as_json):
    """Check that the fan in PATH is smooth and complete and report its invariants."""
    logger = get_logger()
    try:
        fan = FanFile.load(path).to_fan()
    except FanFileError as e:
        _fail(f"Parse Error: {e}", 2)

    try:
        X = ToricVariety(fan)
    except FanValidationError as e:
        logger.error(f"{path}: check '{e.check}' failed: {e.detail}", module="toricount.cli")
        _fail(f"Invalid fan: check '{e.check}' failed: {e.detail}", 1)

    problems = []
    exactness = check_exactness(X)
    if exactness:
        problems.append(f"exactness: {exactness}")
    if not check_class_identity(X):
        problems.append("class identity: Σ μ⁰(n) L^(#I-|n|) != (L-1)^rk·[X]")
    row = {
        "name": fan.name,
        "dim": X.n,
        "rays": X.num_rays,
        "pic_rank": X.pic_rank,
        "omega": X.omega,
        "primitive_collections": " ".join("{" + ",".join(str(i) for i in c) + "}" for c in X.primitive_collections()),
        "class": X.class_of_X(),
    }
    _emit([row], list(row), _want_json(ctx, as_json), "validate")
    if problems:
        _fail("; ".join(problems), 1)
    logger.info(f"{path}: valid fan with {X.num_rays} rays", module="toricount.cli")


@cli.command()
@with_fan
@click.option("--degree", required=True, help="Degree: full vector in Z^I or Pic-dual coordinates (CSV)")
@click.option("--q", type=click.IntRange(min=2), help="Field size (default from config)")
@click.option("--motivic", is_flag=True, help="Also compute the class in L and check it against the count")
@click.option("--bruteforce", is_flag=True, help="Also count by enumerating tuples of forms")
@click.option("-j", "--jobs", type=int, help="Worker processes for the brute-force count")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON array instead of TSV")
@click.pass_context
def count(ctx, fan_path, catalog_name, degree, q, motivic, bruteforce, jobs, as_json):
    """Count morphisms P¹ → X of one degree over F_q."""
    config = _settings(ctx)

    def run():
        X = _load_variety(fan_path, catalog_name)
        y = _degree(X, degree)
        field_size = q or config.get_q()
        in_domain = X.is_effective_dual(y)
        with get_logger().context(variety=X.fan.name or "<fan>", y=",".join(map(str, y)), q=field_size):
            report = census.count_report(X, y, field_size, with_class=motivic and in_domain)
            bf = None
            if bruteforce:
                bf = census.bruteforce_count(X, y, field_size, config.get_budget(), jobs or config.get_jobs())
        row: Dict[str, Any] = {
            "y": report.y,
            "q": report.q,
            "count": report.count,
            "dim": report.expected_dim,
            "leading": report.leading_coeff,
            "class": report.class_L,
            "in_domain": in_domain,
        }
        columns = [*REPORT_COLUMNS, "in_domain"]
        if motivic:
            row["consistent"] = report.consistent()
            columns.append("consistent")
        if bruteforce:
            row["bruteforce"] = bf
            columns.append("bruteforce")
        return [row], columns, report

    rows, columns, report = _run_guarded(run)
    _emit(rows, columns, _want_json(ctx, as_json), "count")
    if motivic and not rows[0]["consistent"]:
        _fail(f"class {report.class_L!r} does not specialize to {report.count}", 1)
    if bruteforce and rows[0]["bruteforce"] != report.count:
        _fail(f"closed form {report.count} differs from brute force {rows[0]['bruteforce']}", 1)


@cli.command()
@with_fan
@click.option("--bundle", help="Height class in Picard coordinates (default: anticanonical)")
@click.option("--q", type=click.IntRange(min=2), help="Field size (default from config)")
@click.option("--motivic", is_flag=True, help="Tabulate classes in L instead of counts")
@click.option("--max-height", type=click.IntRange(min=0), help="Largest height (default from config)")
@click.option("--precision", type=int, help="Lowest exponent of L kept in c_mot (default from config)")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON array instead of TSV")
@click.pass_context
def zeta(ctx, fan_path, catalog_name, bundle, q, motivic, max_height, precision, as_json):
    """Tabulate the height zeta function against its main term."""
    config = _settings(ctx)

    def run():
        X = _load_variety(fan_path, catalog_name)
        x = tuple(_parse_vector(bundle, "--bundle")) if bundle else X.omega
        if not X.is_big(x):
            raise ToricError(f"bundle {list(x)} is not big")
        nmax = config.get_max_height() if max_height is None else max_height
        counts = census.cone_counts(X, x, nmax)
        rows = []
        if motivic:
            table = census.degree_zeta(X, x, nmax)
            constant = census.c_mot(X, config.get_precision() if precision is None else precision)
            for d in range(nmax + 1):
                coefficient = table.rows[d]
                main = constant * TailSeries.exact(LPoly.monomial(d, counts[d]))
                difference = TailSeries.exact(coefficient) - main
                try:
                    dim_diff: Optional[float] = virtual_dim(difference)
                except LPolyError:
                    dim_diff = None
                rows.append({"d": d, "coefficient": coefficient, "main_term": main, "dim_difference": dim_diff})
            return rows
        field_size = q or config.get_q()
        table = census.degree_zeta(X, x, nmax, field_size)
        constant, _ = census.c_fin(X, field_size, config.get_max_total_degree())
        for d in range(nmax + 1):
            coefficient = table.rows[d]
            main = constant * field_size**d * counts[d]
            difference = Fraction(coefficient) - main
            statistic = None
            if d >= 1:
                statistic = abs(difference) * Fraction(d) ** (2 - X.pic_rank) / Fraction(field_size) ** d
            rows.append(
                {"d": d, "coefficient": coefficient, "main_term": main, "difference": difference, "control": statistic}
            )
        return rows

    rows = _run_guarded(run)
    columns = ["d", "coefficient", "main_term"]
    columns += ["dim_difference"] if motivic else ["difference", "control"]
    _emit(rows, columns, _want_json(ctx, as_json), "zeta")


@cli.command()
@with_fan
@click.option("--max-total-degree", type=click.IntRange(min=0), help="Truncation order (default from config)")
@click.option("--q", type=click.IntRange(min=2), help="Aggregate over F_q instead of the motivic coefficients")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON array instead of the dump format")
@click.pass_context
def mu(ctx, fan_path, catalog_name, max_total_degree, q, as_json):
    """Dump the Möbius series: one 'exponent<TAB>coefficient' line per nonzero term."""
    config = _settings(ctx)

    def run():
        X = _load_variety(fan_path, catalog_name)
        dmax = config.get_max_total_degree() if max_total_degree is None else max_total_degree
        return mu_aggregate_fq(X, q, dmax) if q else mu_motivic(X, dmax)

    series = _run_guarded(run)
    if _want_json(ctx, as_json):
        rows = [{"exponent": list(e), "coefficient": _jsonable(c)} for e, c in series.items()]
        click.echo(json.dumps(rows, ensure_ascii=False))
        return
    for line in series.dump_lines():
        click.echo(line)


@cli.command("cox3")
@click.option("--degree", required=True, help="Degree (d0,d1,d2,d3) in the basis D0..D3")
@click.option("--q", type=click.IntRange(min=2), help="Field size (default from config)")
@click.option("--interpolate", is_flag=True, help="Interpolate the counting polynomial over the configured primes")
@click.option("--via-moebius", is_flag=True, help="Cross-check with the Möbius-weighted shifted counts")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON array instead of TSV")
@click.pass_context
def cox3_cmd(ctx, degree, q, interpolate, via_moebius, as_json):
    """Count morphisms to P² blown up at three collinear points."""
    config = _settings(ctx)

    def run():
        d = _parse_vector(degree, "--degree")
        field_size = q or config.get_q()
        budget = config.get_budget()
        count_value = cox3.bruteforce_count_cox3(d, field_size, budget, normalized=True)
        row: Dict[str, Any] = {
            "y": cox3.COX3.full_degree(d),
            "q": field_size,
            "count": count_value,
            "dim": cox3.COX3.morphism_dimension(d),
            "leading": None,
            "class": None,
        }
        columns = list(REPORT_COLUMNS)
        consistent = True
        if interpolate:
            poly = cox3.interpolate_count_cox3(d, config.get_primes(), budget)
            row["class"] = poly
            row["leading"] = poly.leading_coeff()
            consistent = poly.evaluate(field_size) == count_value and poly.degree() == row["dim"] and row["leading"] == 1
        if via_moebius:
            row["via_moebius"] = cox3.count_via_moebius_cox3(d, field_size, budget)
            consistent = consistent and row["via_moebius"] == count_value
            columns.append("via_moebius")
        if interpolate or via_moebius:
            row["consistent"] = consistent
            columns.append("consistent")
        return row, columns

    row, columns = _run_guarded(run)
    _emit([row], columns, _want_json(ctx, as_json), "cox3")
    if row.get("consistent") is False:
        _fail("cox3 cross-checks disagree", 1)


@cli.command()
@click.argument("suite", type=click.Choice(SUITE_NAMES))
@click.option("-j", "--jobs", type=int, help="Worker processes for brute-force counts")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON array instead of TSV")
@click.pass_context
def verify(ctx, suite, jobs, as_json):
    """Run a verification suite; exit 1 if any check fails."""
    config = _settings(ctx)

    def run():
        params = SuiteParams(
            q=config.get_q(),
            budget=config.get_budget(),
            jobs=jobs or config.get_jobs(),
            max_total_degree=config.get_max_total_degree(),
            max_height=config.get_max_height(),
            primes=config.get_primes(),
        )
        return run_suite(suite, params)

    results = _run_guarded(run)
    rows = [{"suite": r.suite, "check": r.name, "status": r.status, "detail": r.detail} for r in results]
    _emit(rows, ["suite", "check", "status", "detail"], _want_json(ctx, as_json), f"verify {suite}")
    failed = [r.name for r in results if not r.ok]
    if failed:
        _fail(f"{len(failed)} check(s) failed: {', '.join(failed)}", 1)


if __name__ == "__main__":
    cli()
