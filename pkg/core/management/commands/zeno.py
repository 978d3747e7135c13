"""
Django команда лаборатории эффекта Зенона.
Использование:
    python manage.py zeno quantum --rabi 3.14159265 --t 1 --n 10
    python manage.py zeno lc --L 1 --C 1 --q0 1 --t 1 --n 4 --method analytic
    python manage.py zeno fit --input runs/lc_records.csv --n-min 100
    python manage.py zeno plot --input runs/lc_records.csv --log-log --annotate
"""
import time
from dataclasses import replace
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

import core
from core.exceptions import OutOfDomainError, ZenoLabError
from core.models import (LCCircuit, LHOParameters, QuantumState, RunManifest,
                         SwitchProtocol, SystemTag, ZenoSchedule)
from core.services.chart import render_chart
from core.services.convergence import (estimate_tau_short_time,
                                       fit_deficit_slope, parse_n_grid, scan_n)
from core.services.loaders import load_circuit, load_hamiltonian
from core.services.manifest import manifest_path_for, write_manifest
from core.services.oscillator import (initial_state, switched_charge_exact,
                                      switched_charge_taylor,
                                      switched_run_numeric)
from core.services.protocols import evaluate_schedule, run_trajectories
from core.services.quantum import rabi_hamiltonian
from core.services.records import (fit_report, read_records,
                                   read_short_time_samples, require_records,
                                   write_json,
                                   write_records, write_trace)


class Command(BaseCommand):
    help = "Моделирует квантовый и классический эффект Зенона и анализирует сходимость"
    requires_system_checks = []

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest="subcommand", required=True)
        cli = parser.called_from_command_line
        self._subparsers = {}

        quantum = subparsers.add_parser(
            "quantum",
            help="Протокол измерений для квантовой системы",
            called_from_command_line=cli,
        )
        quantum.add_argument("--hamiltonian", help="JSON-файл с гамильтонианом")
        quantum.add_argument("--rabi", type=float, help="Встроенный гамильтониан (Ω/2)σx")
        quantum.add_argument("--hbar", type=float, help="ħ для --rabi")
        self._add_schedule_arguments(quantum)
        quantum.add_argument("--trials", type=int, help="Число траекторий Монте-Карло")
        quantum.add_argument("--seed", type=int, help="Зерно (по умолчанию ZENO_SEED)")
        self._add_output_arguments(quantum)

        lc = subparsers.add_parser(
            "lc",
            help="LC-контур (или механический осциллятор) с ключом",
            called_from_command_line=cli,
        )
        lc.add_argument("--L", type=float, help="Индуктивность")
        lc.add_argument("--C", type=float, help="Ёмкость")
        lc.add_argument("--q0", type=float, help="Начальный заряд")
        lc.add_argument("--m", type=float, help="Масса (механический вариант)")
        lc.add_argument("--k", type=float, help="Жёсткость (механический вариант)")
        lc.add_argument("--x0", type=float, help="Начальное смещение (механический вариант)")
        lc.add_argument("--circuit", help="JSON-файл с параметрами контура")
        lc.add_argument("--lc-unit", action="store_true", help="Пресет L = C = q0 = 1")
        self._add_schedule_arguments(lc)
        lc.add_argument("--method", choices=["analytic", "rk4"], default="analytic")
        lc.add_argument("--step", type=float, help="Шаг РК4 (по умолчанию ZENO_RK4_STEP)")
        lc.add_argument("--trace", help="CSV с траекторией (только для одного --n)")
        self._add_output_arguments(lc)

        fit = subparsers.add_parser(
            "fit",
            help="Наклон дефицита и проверка квадратичного начала распада",
            called_from_command_line=cli,
        )
        fit.add_argument("--input", help="CSV с записями сходимости")
        fit.add_argument("--n-min", type=int, default=1)
        fit.add_argument("--short-time", help="CSV с колонками t, value")
        self._add_output_arguments(fit)

        plot = subparsers.add_parser(
            "plot",
            help="SVG-график value/deficit от n",
            called_from_command_line=cli,
        )
        plot.add_argument("--input", help="CSV с записями сходимости")
        plot.add_argument("--y", choices=["value", "deficit"])
        plot.add_argument("--log-log", action="store_true")
        plot.add_argument("--annotate", action="store_true")
        self._add_output_arguments(plot)

        self._subparsers = {
            "quantum": quantum,
            "lc": lc,
            "fit": fit,
            "plot": plot,
        }

    @staticmethod
    def _add_schedule_arguments(parser):
        parser.add_argument("--t", type=float, help="Полное время")
        parser.add_argument("--n", type=int, help="Число прерываний")
        parser.add_argument("--n-grid", help="Сетка n: '10,100,1000' или '100:100000'")

    @staticmethod
    def _add_output_arguments(parser):
        parser.add_argument("--output", help="Путь к результату")
        parser.add_argument("--manifest", help="Путь к манифесту запуска")

    def handle(self, *args, **options):
        subcommand = options["subcommand"]
        handler = getattr(self, f"_handle_{subcommand}")
        started = time.perf_counter()

        try:
            outputs, seed = handler(options)
        except ZenoLabError as e:
            raise CommandError(str(e), returncode=e.exit_code)

        manifest_path = Path(options["manifest"] or manifest_path_for(outputs[0]))
        options["manifest"] = str(manifest_path)
        manifest = RunManifest(
            command=subcommand,
            parameters=self._parameters(subcommand, options),
            seed=seed,
            version=core.__version__,
            argv=self._argv(subcommand, options),
            outputs=[str(path) for path in outputs],
            wall_clock_seconds=round(time.perf_counter() - started, 6),
        )
        write_manifest(manifest, manifest_path)
        self.stdout.write(self.style.SUCCESS(f"Манифест запуска: {manifest_path}"))

    # --- quantum ----------------------------------------------------------

    def _handle_quantum(self, options):
        hamiltonian, state = self._quantum_system(options)
        t = self._require(options, "quantum", "t")
        grid = self._n_grid(options, "quantum")
        seed = options["seed"] if options["seed"] is not None else settings.ZENO_SEED
        options["seed"] = seed
        output = self._output(options, "quantum_records.csv")

        results = {}

        def evaluate(n):
            results[n] = evaluate_schedule(state, hamiltonian, ZenoSchedule(t, n))
            return results[n].exact_survival

        records = []
        for record in scan_n(evaluate, grid, SystemTag.QUANTUM):
            result = results[record.n]
            record = replace(
                record,
                exact=result.exact_survival,
                taylor_product=result.taylor_product_survival,
                first_order=result.first_order_survival,
            )
            if options["trials"] is not None:
                ensemble = run_trajectories(
                    state,
                    hamiltonian,
                    ZenoSchedule(t, record.n),
                    trials=options["trials"],
                    seed=seed,
                    sigmas=settings.ZENO_MC_SIGMAS,
                )
                record = replace(
                    record, mc_frequency=ensemble.frequency, mc_halfwidth=ensemble.halfwidth
                )
            records.append(record)
            self.stdout.write(
                f"  ✓ n={record.n} exact={result.exact_survival:.6f} "
                f"unwatched={result.unwatched_survival:.6f} tau={result.tau:.6g}"
            )

        write_records(output, records)
        self.stdout.write(self.style.SUCCESS(f"Записи сходимости: {output}"))
        return [output], seed

    def _quantum_system(self, options):
        if options["hamiltonian"] and options["rabi"] is not None:
            raise OutOfDomainError("укажите либо --hamiltonian, либо --rabi")
        if options["hamiltonian"]:
            return load_hamiltonian(Path(options["hamiltonian"]))
        if options["rabi"] is not None:
            hbar = options["hbar"] if options["hbar"] is not None else settings.ZENO_HBAR
            options["hbar"] = hbar
            return rabi_hamiltonian(options["rabi"], hbar=hbar), QuantumState.basis(2, 0)
        raise OutOfDomainError(
            f"нужен --hamiltonian или --rabi; {self._usage('quantum')}"
        )

    # --- lc ---------------------------------------------------------------

    def _handle_lc(self, options):
        circuit, tag = self._circuit(options)
        t = self._require(options, "lc", "t")
        grid = self._n_grid(options, "lc")
        method = options["method"]
        step = options["step"] if options["step"] is not None else settings.ZENO_RK4_STEP
        if method == "rk4" or options["trace"]:
            options["step"] = step
        if options["trace"] and len(grid) != 1:
            raise OutOfDomainError("--trace работает только с одним --n")
        if circuit.q0 == 0:
            raise OutOfDomainError("q0 должно быть ненулевым: заряд выводится как q/q0")
        output = self._output(options, "lc_records.csv")

        runs = {}

        def evaluate(n):
            protocol = SwitchProtocol(t, n)
            if method == "rk4":
                runs[n] = switched_run_numeric(circuit, protocol, step)
                return runs[n].final_state.charge / circuit.q0
            return switched_charge_exact(circuit, protocol) / circuit.q0

        records = []
        for record in scan_n(evaluate, grid, tag):
            protocol = SwitchProtocol(t, record.n)
            # t/(nτ) > 1 влечёт и отрицательное первое приближение
            try:
                taylor = switched_charge_taylor(circuit, protocol)
            except OutOfDomainError:
                taylor = None
            first_order = taylor.first_order if taylor is not None else None
            record = replace(
                record,
                exact=switched_charge_exact(circuit, protocol) / circuit.q0,
                taylor_product=taylor.product_form / circuit.q0 if taylor is not None else None,
                first_order=(first_order.value / circuit.q0
                             if first_order is not None and first_order.in_domain else None),
            )
            records.append(record)
            self.stdout.write(f"  ✓ n={record.n} q/q0={record.value:.6f} ({method})")

        outputs = [write_records(output, records)]
        self.stdout.write(self.style.SUCCESS(f"Записи сходимости: {output}"))

        if options["trace"]:
            n = grid[0]
            run = runs.get(n) or switched_run_numeric(circuit, SwitchProtocol(t, n), step)
            outputs.append(write_trace(Path(options["trace"]), initial_state(circuit), run))
            self.stdout.write(self.style.SUCCESS(f"Траектория: {options['trace']}"))
        return outputs, None

    def _circuit(self, options):
        sources = [
            options["circuit"] is not None,
            options["lc_unit"],
            any(options[k] is not None for k in ("L", "C", "q0")),
            any(options[k] is not None for k in ("m", "k", "x0")),
        ]
        if sum(sources) != 1:
            raise OutOfDomainError(
                f"укажите ровно один вариант: --circuit, --lc-unit, "
                f"--L/--C/--q0 или --m/--k/--x0; "
                f"{self._usage('lc')}"
            )
        if options["circuit"]:
            return load_circuit(Path(options["circuit"]))
        if options["lc_unit"]:
            return LCCircuit(inductance=1.0, capacitance=1.0, q0=1.0), SystemTag.CLASSICAL_LC
        if sources[2]:
            L, C, q0 = (self._require(options, "lc", k) for k in ("L", "C", "q0"))
            return LCCircuit(inductance=L, capacitance=C, q0=q0), SystemTag.CLASSICAL_LC
        m, k, x0 = (self._require(options, "lc", key) for key in ("m", "k", "x0"))
        return LHOParameters(mass=m, stiffness=k, x0=x0).as_circuit(), SystemTag.CLASSICAL_LHO

    # --- fit --------------------------------------------------------------

    def _handle_fit(self, options):
        if not options["input"] and not options["short_time"]:
            raise OutOfDomainError(f"нужен --input или --short-time; {self._usage('fit')}")
        output = self._output(options, "fit_report.json")

        deficit_fit = None
        if options["input"]:
            records = read_records(Path(options["input"]))
            deficit_fit = fit_deficit_slope(records, options["n_min"])
            self.stdout.write(
                f"slope={deficit_fit.slope:.6f} intercept={deficit_fit.intercept:.6f} "
                f"r_squared={deficit_fit.r_squared:.9f} points={deficit_fit.points}"
            )

        short_time_fit = None
        if options["short_time"]:
            samples = read_short_time_samples(Path(options["short_time"]))
            short_time_fit = estimate_tau_short_time(samples)
            self.stdout.write(
                f"tau={short_time_fit.tau_estimate:.6f} "
                f"linear_coefficient={short_time_fit.linear_coefficient:.3e}"
            )

        write_json(output, fit_report(deficit_fit, short_time_fit))
        self.stdout.write(self.style.SUCCESS(f"Отчёт: {output}"))
        return [output], None

    # --- plot -------------------------------------------------------------

    def _handle_plot(self, options):
        source = Path(self._require(options, "plot", "input"))
        records = require_records(read_records(source), source)

        y_field = options["y"] or ("deficit" if options["log_log"] else "value")
        options["y"] = y_field
        annotation = None
        if options["annotate"]:
            fit = fit_deficit_slope(records, n_min=min(r.n for r in records))
            annotation = f"slope = {fit.slope:.4f}, r2 = {fit.r_squared:.6f}"

        output = Path(options["output"] or source.with_name(f"{source.stem}_chart.svg"))
        options["output"] = str(output)
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(
            render_chart(records, y_field=y_field, log_log=options["log_log"],
                         annotation=annotation),
            encoding="utf-8",
        )
        self.stdout.write(self.style.SUCCESS(f"График: {output}"))
        return [output], None

    # --- helpers ----------------------------------------------------------

    def _usage(self, subcommand):
        return self._subparsers[subcommand].format_usage().strip()

    def _require(self, options, subcommand, key):
        if options.get(key) is None:
            flag = key.replace("_", "-")
            raise OutOfDomainError(f"нужен --{flag}; {self._usage(subcommand)}")
        return options[key]

    def _n_grid(self, options, subcommand):
        if options["n"] is not None and options["n_grid"]:
            raise OutOfDomainError("укажите либо --n, либо --n-grid")
        if options["n"] is not None:
            return [options["n"]]
        if options["n_grid"]:
            return parse_n_grid(options["n_grid"])
        raise OutOfDomainError(f"нужен --n или --n-grid; {self._usage(subcommand)}")

    def _output(self, options, default_name):
        output = Path(options["output"] or settings.ZENO_OUTPUT_DIR / default_name)
        options["output"] = str(output)
        return output

    def _flag_actions(self, subcommand):
        for action in self._subparsers[subcommand]._actions:
            if action.option_strings and action.dest != "help":
                yield action

    def _parameters(self, subcommand, options):
        return {
            action.dest: options.get(action.dest) for action in self._flag_actions(subcommand)
        }

    def _argv(self, subcommand, options):
        argv = [subcommand]
        for action in self._flag_actions(subcommand):
            value = options.get(action.dest)
            if value is None or value is False:
                continue
            if value is True:
                argv.append(action.option_strings[0])
            else:
                argv.extend([action.option_strings[0], str(value)])
        return argv
