#include "cli.hpp"

#include "fieldcal/fieldcal.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace fieldcal::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct SolveFlags {
    std::string field;
    std::string sensors;
    std::string holdout;
    std::string out;
    double alpha = 0.01;
    double sigma_m = 1000.0;
    double sigma_d = 1.0;
    std::string solver = "lowrank";
    std::optional<std::size_t> rank;
    std::string rowsum = "lowrank";
    bool heatmaps = false;
};

struct SweepFlags {
    SolveFlags solve;
    std::string axis;
    std::string values;
};

struct SynthFlags {
    std::uint64_t seed = 1;
    std::size_t nx = 80;
    std::size_t ny = 40;
    double spacing = 0.09;
    std::size_t calib = 4;
    std::size_t holdout = 4;
    double error_scale = 1.0;
    std::string out;
};

void add_solve_flags(CLI::App& cmd, SolveFlags& f, bool holdout_required) {
    cmd.add_option("--field", f.field, "Simulated field (grid CSV)")->required();
    cmd.add_option("--sensors", f.sensors, "Calibration sensors (x,y,value CSV)")->required();
    auto* holdout = cmd.add_option("--holdout", f.holdout, "Held-out sensors used only for scoring");
    if (holdout_required) holdout->required();
    cmd.add_option("--out", f.out, "Output directory")->required();
    cmd.add_option("--alpha", f.alpha, "Balance factor alpha in (0, 1]")->capture_default_str();
    cmd.add_option("--sigma-m", f.sigma_m, "Magnitude variance (squared field units)")->capture_default_str();
    cmd.add_option("--sigma-d", f.sigma_d, "Distance variance (m^2)")->capture_default_str();
    cmd.add_option("--solver", f.solver, "dense|lowrank")
        ->check(CLI::IsMember({"dense", "lowrank"}))
        ->capture_default_str();
    cmd.add_option("--rank", f.rank, "Low-rank sample count (default min(100, N))");
    cmd.add_option("--rowsum", f.rowsum, "exact|lowrank row sums for the low-rank solver")
        ->check(CLI::IsMember({"exact", "lowrank"}))
        ->capture_default_str();
    cmd.add_flag("--heatmaps", f.heatmaps, "Also write PGM heatmaps");
}

CalibrationParams params_from(const SolveFlags& f) {
    CalibrationParams p;
    p.alpha = f.alpha;
    p.sigma_m = f.sigma_m;
    p.sigma_d = f.sigma_d;
    p.solver = f.solver == "dense" ? SolverKind::dense : SolverKind::lowrank;
    p.rowsum_mode = f.rowsum == "exact" ? RowSumMode::exact : RowSumMode::lowrank;
    p.n_samples = f.rank;
    if (f.rank && *f.rank == 0) {
        throw DomainError("--rank must be at least 1");
    }
    // Everything except the rank upper bound, which needs N.
    p.validate(f.rank.value_or(1));
    return p;
}

struct LoadedInputs {
    FieldFile field;
    std::vector<SnappedSensor> sensors;
    std::vector<SnappedSensor> holdout;
};

LoadedInputs load_inputs(const SolveFlags& f) {
    LoadedInputs in;
    in.field = read_field_file(f.field);
    in.sensors = snap_sensors(in.field.grid, read_sensor_file(f.sensors), f.sensors);
    if (!f.holdout.empty()) {
        in.holdout = snap_sensors(in.field.grid, read_sensor_file(f.holdout), f.holdout);
    }
    return in;
}

std::vector<SensorObservation> observations(const std::vector<SnappedSensor>& snapped) {
    std::vector<SensorObservation> out;
    out.reserve(snapped.size());
    for (const auto& s : snapped) out.push_back(s.observation);
    return out;
}

CalibrationProblem build_problem(const LoadedInputs& in) {
    if (in.sensors.size() > in.field.values.size()) {
        throw FormatError("more sensors than mesh points");
    }
    return CalibrationProblem::on_grid(in.field.grid, in.field.values, observations(in.sensors));
}

Json sensors_json(const std::vector<SnappedSensor>& sensors) {
    Json arr = Json::array();
    for (const auto& s : sensors) {
        arr.push_back({{"x", s.record.x},
                       {"y", s.record.y},
                       {"observed", s.record.value},
                       {"mesh_index", s.observation.mesh_index},
                       {"snap_distance", s.snap_distance}});
    }
    return arr;
}

Json report_json(const EvaluationReport& r) {
    Json per = Json::array();
    for (const auto& s : r.per_sensor) {
        per.push_back({{"sensor", s.sensor_id}, {"error_before", s.error_before}, {"error_after", s.error_after}});
    }
    return {{"rmse_before", r.rmse_before},
            {"rmse_after", r.rmse_after},
            {"improvement", r.improvement},
            {"per_sensor", per}};
}

FieldFile with_values(const GridLayout& grid, const Eigen::VectorXd& v) {
    return {grid, std::vector<double>(v.data(), v.data() + v.size())};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
    }
}

int cmd_calibrate(const SolveFlags& f, std::ostream& out) {
    const auto t0 = Clock::now();
    auto params = params_from(f);
    const auto inputs = load_inputs(f);
    const auto problem = build_problem(inputs);
    params.validate(problem.size());
    const double load_s = seconds_since(t0);

    const auto t1 = Clock::now();
    const auto result = calibrate(problem, params);
    const double solve_s = seconds_since(t1);

    const auto t2 = Clock::now();
    ensure_dir(f.out);
    const fs::path dir(f.out);
    write_field_file(dir / "calibrated.csv", with_values(inputs.field.grid, result.f_hat));
    write_field_file(dir / "error.csv", with_values(inputs.field.grid, result.v_hat()));
    if (f.heatmaps) {
        write_heatmap(with_values(inputs.field.grid, result.f_hat), dir / "calibrated.pgm");
        write_heatmap(with_values(inputs.field.grid, result.v_hat()), dir / "error.pgm");
        write_heatmap(inputs.field, dir / "simulated.pgm");
    }

    Json report;
    report["problem"] = {{"points", problem.size()},
                         {"nx", inputs.field.grid.nx},
                         {"ny", inputs.field.grid.ny},
                         {"sensors", problem.sensor_count()}};
    report["params"] = {{"alpha", params.alpha},
                        {"sigma_m", params.sigma_m},
                        {"sigma_d", params.sigma_d},
                        {"solver", to_string(params.solver)},
                        {"rank", params.sample_count(problem.size())},
                        {"rowsum", to_string(params.rowsum_mode)}};
    report["lambda"] = result.lambda;
    report["solver"] = to_string(result.solver_used);
    report["max_abs_v"] = result.v_hat().cwiseAbs().maxCoeff();
    report["sensors"] = sensors_json(inputs.sensors);
    if (!inputs.holdout.empty()) {
        report["holdout"] = sensors_json(inputs.holdout);
        report["evaluation"] = report_json(evaluate(problem, result, observations(inputs.holdout)));
    }
    report["timings"] = {{"load_s", load_s}, {"solve_s", solve_s}, {"write_s", seconds_since(t2)}};
    write_text(dir / "report.json", report.dump(2) + "\n");

    out << "calibrated " << problem.size() << " points with " << problem.sensor_count()
        << " sensors (" << to_string(result.solver_used) << ", lambda=" << format_number(result.lambda)
        << ") -> " << f.out << '\n';
    return kOk;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        double v = 0.0;
        const auto* begin = token.data();
        const auto* end = token.data() + token.size();
        while (begin < end && *begin == ' ') ++begin;
        if (begin < end && *begin == '+') ++begin;
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc{} || ptr != end || begin == end) {
            throw DomainError("--values entry '" + token + "' is not a number");
        }
        values.push_back(v);
    }
    if (values.empty()) {
        throw DomainError("--values is empty");
    }
    return values;
}

int cmd_sweep(const SweepFlags& f, std::ostream& out) {
    const auto axis = f.axis == "alpha" ? SweepAxis::alpha
                      : f.axis == "sigma-m" ? SweepAxis::sigma_m
                                            : SweepAxis::sigma_d;
    const auto values = parse_values(f.values);
    for (const double v : values) {
        if (!(v > 0.0) || (axis == SweepAxis::alpha && v > 1.0)) {
            throw DomainError("--values entry " + format_number(v) + " is outside the " + f.axis +
                              " domain");
        }
    }
    auto params = params_from(f.solve);
    const auto inputs = load_inputs(f.solve);
    const auto problem = build_problem(inputs);
    params.validate(problem.size());

    const auto entries = sweep(problem, params, axis, values, observations(inputs.holdout));

    ensure_dir(f.solve.out);
    std::ostringstream csv;
    csv << "value,rmse_before,rmse_after,improvement,max_abs_v,support_area_fraction\n";
    for (const auto& e : entries) {
        csv << format_number(e.value) << ',' << format_number(e.report.rmse_before) << ','
            << format_number(e.report.rmse_after) << ',' << format_number(e.report.improvement) << ','
            << format_number(e.max_abs_v) << ',' << format_number(e.support_area_fraction) << '\n';
    }
    write_text(fs::path(f.solve.out) / "sweep.csv", csv.str());
    out << "swept " << f.axis << " over " << entries.size() << " values -> " << f.solve.out << '\n';
    return kOk;
}

std::vector<SensorRecord> records_for(const GridLayout& grid, const std::vector<SensorObservation>& obs) {
    std::vector<SensorRecord> out;
    out.reserve(obs.size());
    for (const auto& o : obs) {
        const auto p = grid.position_of(o.mesh_index);
        out.push_back({p[0], p[1], o.observed});
    }
    return out;
}

int cmd_synth(const SynthFlags& f, std::ostream& out) {
    SynthOptions options;
    options.error_scale = f.error_scale;
    if (!(f.error_scale >= 0.0)) {
        throw DomainError("--error-scale must be non-negative");
    }
    const auto c = make_case(f.seed, f.nx, f.ny, f.spacing, f.calib, f.holdout, options);

    ensure_dir(f.out);
    const fs::path dir(f.out);
    write_field_file(dir / "truth.csv", with_values(c.grid, c.ground_truth));
    write_field_file(dir / "field.csv", with_values(c.grid, c.problem.values()));
    write_sensor_file(dir / "sensors.csv", records_for(c.grid, c.calib_sensors));
    write_sensor_file(dir / "holdout.csv", records_for(c.grid, c.holdout_sensors));
    out << "wrote synthetic case (seed " << f.seed << ", " << f.nx << "x" << f.ny << ") -> " << f.out
        << '\n';
    return kOk;
}

template <typename Fn>
int guarded(Fn&& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kMalformedInput;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidFlag;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return kSolverFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Calibrate a simulated scalar field against point observations", "fieldcal"};
    app.require_subcommand(1);

    SolveFlags calib_flags;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Calibrate a field with sensor observations");
    add_solve_flags(*calibrate_cmd, calib_flags, false);

    SweepFlags sweep_flags;
    auto* sweep_cmd = app.add_subcommand("sweep", "Calibrate once per parameter value and tabulate scores");
    add_solve_flags(*sweep_cmd, sweep_flags.solve, true);
    sweep_cmd->add_option("--axis", sweep_flags.axis, "alpha|sigma-m|sigma-d")
        ->required()
        ->check(CLI::IsMember({"alpha", "sigma-m", "sigma-d"}));
    sweep_cmd->add_option("--values", sweep_flags.values, "Comma-separated parameter values")->required();

    SynthFlags synth_flags;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic case");
    synth_cmd->add_option("--seed", synth_flags.seed)->capture_default_str();
    synth_cmd->add_option("--nx", synth_flags.nx)->capture_default_str();
    synth_cmd->add_option("--ny", synth_flags.ny)->capture_default_str();
    synth_cmd->add_option("--spacing", synth_flags.spacing, "Grid spacing (m)")->capture_default_str();
    synth_cmd->add_option("--calib", synth_flags.calib, "Calibration sensor count")->capture_default_str();
    synth_cmd->add_option("--holdout", synth_flags.holdout, "Holdout sensor count")->capture_default_str();
    synth_cmd->add_option("--error-scale", synth_flags.error_scale, "Injected error multiplier")
        ->capture_default_str();
    synth_cmd->add_option("--out", synth_flags.out, "Output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalidFlag;
    }

    if (calibrate_cmd->parsed()) {
        return guarded([&] { return cmd_calibrate(calib_flags, out); }, err);
    }
    if (sweep_cmd->parsed()) {
        return guarded([&] { return cmd_sweep(sweep_flags, out); }, err);
    }
    return guarded([&] { return cmd_synth(synth_flags, out); }, err);
}

} // namespace fieldcal::cli
