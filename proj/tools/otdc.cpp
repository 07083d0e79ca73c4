// otdc: CI-constraint data repair and score-fairness toolkit, batch CLI.
//
// Exit codes: 0 success, 2 input/parse error, 3 constraint-or-metric
// verdict, 4 solver non-convergence (best-effort outputs still written).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otdc/calibrate.hpp"
#include "otdc/ci_repair.hpp"
#include "otdc/csv.hpp"
#include "otdc/distribution.hpp"
#include "otdc/eval.hpp"
#include "otdc/fairness.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitVerdict = 3;
constexpr int kExitNoConverge = 4;

std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_report(const std::string& path, const json& j) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw otdc::InputError("cannot write report '" + path + "'");
    out << j.dump(2) << '\n';
}

int read_threads_cap() {
    const char* env = std::getenv("OTDC_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    if (v < 1) throw otdc::InputError("OTDC_THREADS must be a positive integer");
    return v;
}

// Flat key=value config: each key maps to the subcommand flag --key. Values
// from the file are appended only when the flag is absent from the command
// line, so explicit flags always win.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw otdc::InputError("cannot open config file '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = otdc::detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw otdc::InputError("config: expected key=value, got '" + t + "'");
        const std::string key = otdc::detail::trim(t.substr(0, eq));
        std::string value = otdc::detail::trim(t.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        const std::string flag = "--" + key;
        bool present = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
        if (!present) {
            args.push_back(flag);
            args.push_back(value);
        }
    }
    return args;
}

otdc::Dataset load_dataset(const std::string& path, const std::string& schema_spec) {
    const otdc::CsvTable table = otdc::read_csv(path);
    const otdc::Schema schema = schema_spec == "infer"
                                    ? otdc::infer_schema(table)
                                    : otdc::parse_schema_spec(schema_spec, table.header);
    return otdc::dataset_from_csv(table, schema, path);
}

otdc::ScoreTable load_scores(const std::string& path) {
    const otdc::CsvTable table = otdc::read_csv(path);
    const std::size_t id_col = table.column_of("id", path);
    const std::size_t score_col = table.column_of("score", path);
    const std::size_t group_col = table.column_of("group", path);
    const std::size_t label_col = table.column_of("label", path);
    otdc::ScoreTable t;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        otdc::ScoreRecord rec;
        rec.id = otdc::detail::trim(row[id_col]);
        try {
            rec.score = std::stod(otdc::detail::trim(row[score_col]));
            const std::string label = otdc::detail::trim(row[label_col]);
            if (label != "0" && label != "1")
                throw otdc::InputError("label must be 0 or 1, got '" + label + "'");
            rec.label = label == "1" ? 1 : 0;
            rec.group = otdc::parse_group(otdc::detail::trim(row[group_col]));
        } catch (const std::exception& e) {
            throw otdc::CsvError(path, r + 2, e.what());
        }
        t.records.push_back(std::move(rec));
    }
    if (t.records.empty()) throw otdc::CsvError(path, 1, "no data rows");
    t.validate();
    return t;
}

void write_scores(const std::string& path, const otdc::ScoreTable& t) {
    otdc::CsvTable out;
    out.header = {"id", "score", "group", "label"};
    for (const auto& r : t.records)
        out.rows.push_back({r.id, fmt9(r.score), otdc::group_name(r.group),
                            r.label ? "1" : "0"});
    otdc::write_csv(path, out);
}

void write_dataset(const std::string& path, const otdc::Schema& schema,
                   const std::vector<otdc::Tuple>& rows) {
    otdc::CsvTable out;
    for (const auto& a : schema.attrs()) out.header.push_back(a.name);
    for (const auto& t : rows) out.rows.push_back(schema.strings_of(t));
    otdc::write_csv(path, out);
}

json panel_json(const otdc::MetricPanel& p) {
    return json{{"AUC", p.auc},          {"DSP_DP", p.dsp_dp},
                {"DSP_EO", p.dsp_eo},    {"DSP_EOD", p.dsp_eod},
                {"dxAUC", p.delta_xauc}, {"xAUC_ab", p.xauc_ab},
                {"xAUC_ba", p.xauc_ba}};
}

struct CheckCiArgs {
    std::string data, schema_spec = "infer", constraint, report;
    double tol = 1e-9;
};

int cmd_check_ci(const CheckCiArgs& args) {
    const otdc::Dataset ds = load_dataset(args.data, args.schema_spec);
    otdc::CIConstraint sigma = otdc::parse_constraint(args.constraint);
    sigma.validate(ds.schema);
    const otdc::DiscreteDistribution p = otdc::empirical_distribution(ds.rows, ds.schema);
    const otdc::CICheck check = otdc::satisfies_ci(p, sigma, args.tol);
    const double cmi = otdc::conditional_mutual_information(p, sigma);
    std::cout << "constraint " << (check.satisfied ? "satisfied" : "violated")
              << " violation=" << fmt9(check.violation) << " cmi=" << fmt9(cmi)
              << " tol=" << fmt9(args.tol) << "\n";
    write_report(args.report, json{{"cmi", cmi},
                                   {"constraint", args.constraint},
                                   {"satisfied", check.satisfied},
                                   {"tol", args.tol},
                                   {"violation", check.violation}});
    return check.satisfied ? kExitOk : kExitVerdict;
}

struct RepairArgs {
    std::string data, schema_spec = "infer", constraint, cost = "hamming", out, report;
    double epsilon = 0.01;
    double ci_tol = 1e-6;
    std::uint64_t seed = 0;
    int max_iter = 10000;
};

int cmd_repair(const RepairArgs& args) {
    const otdc::Dataset ds = load_dataset(args.data, args.schema_spec);
    otdc::RepairProblem prob;
    prob.data = ds.rows;
    prob.schema = ds.schema;
    prob.sigma = otdc::parse_constraint(args.constraint);
    prob.sigma.validate(ds.schema);
    prob.cost = otdc::parse_cost_kind(args.cost);
    prob.ci_tol = args.ci_tol;
    prob.reg.epsilon = args.epsilon;
    prob.reg.max_iter = args.max_iter;

    const otdc::RepairResult res = otdc::solve_probabilistic_cleaner(prob);
    const std::vector<otdc::Tuple> repaired =
        otdc::apply_cleaner(ds.rows, ds.schema, res.cleaner, args.seed);
    if (!args.out.empty()) write_dataset(args.out, ds.schema, repaired);

    const bool converged = res.status == otdc::SolveStatus::Converged;
    write_report(args.report,
                 json{{"ci_violation_after", res.ci_violation_after},
                      {"ci_violation_before", res.ci_violation_before},
                      {"constraint", args.constraint},
                      {"cost", args.cost},
                      {"epsilon", args.epsilon},
                      {"iterations", res.iterations},
                      {"lifted", res.lifted},
                      {"seed", args.seed},
                      {"status", converged ? "converged" : "max_iterations"},
                      {"transport_cost", res.transport_cost}});
    std::cout << "repair " << (converged ? "converged" : "did not converge")
              << " transport_cost=" << fmt9(res.transport_cost)
              << " violation_before=" << fmt9(res.ci_violation_before)
              << " violation_after=" << fmt9(res.ci_violation_after)
              << (res.lifted ? " (lifted)" : "") << "\n";
    return converged ? kExitOk : kExitNoConverge;
}

struct FairnessArgs {
    std::string scores, report;
};

int cmd_fairness(const FairnessArgs& args) {
    const otdc::ScoreTable t = load_scores(args.scores);
    if (!t.has_group(otdc::Group::A) || !t.has_group(otdc::Group::B)) {
        std::cerr << "fairness: both groups required for comparative metrics\n";
        return kExitVerdict;
    }
    otdc::MetricPanel panel;
    try {
        panel = otdc::metric_panel(t);
    } catch (const otdc::InputError& e) {
        std::cerr << "fairness: " << e.what() << "\n";
        return kExitVerdict;
    }
    const json j = panel_json(panel);
    std::cout << j.dump(2) << "\n";
    write_report(args.report, j);
    return kExitOk;
}

struct CalibrateArgs {
    std::string scores, targets = "tpr,fpr", out, report;
    double alpha = -1.0;
    int lambda_grid = 101;
    int quantile_grid = 1000;
};

int cmd_calibrate(const CalibrateArgs& args) {
    const otdc::ScoreTable t = load_scores(args.scores);
    if (!t.has_group(otdc::Group::A) || !t.has_group(otdc::Group::B)) {
        std::cerr << "calibrate: both groups required\n";
        return kExitVerdict;
    }
    otdc::CalibrationConfig cfg;
    cfg.alpha = args.alpha;
    cfg.lambda_grid = args.lambda_grid;
    cfg.quantile_grid = args.quantile_grid;
    cfg.gamma_targets.clear();
    std::stringstream ss(args.targets);
    std::string part;
    while (std::getline(ss, part, ','))
        cfg.gamma_targets.push_back(otdc::parse_rate_metric(otdc::detail::trim(part)));

    otdc::CalibrationResult res;
    try {
        res = otdc::search_lambda(t, cfg);
    } catch (const otdc::InputError& e) {
        std::cerr << "calibrate: " << e.what() << "\n";
        return kExitVerdict;
    }
    if (!args.out.empty()) write_scores(args.out, res.calibrated);
    write_report(args.report, json{{"after", panel_json(res.after)},
                                   {"before", panel_json(res.before)},
                                   {"lambda_star", res.lambda_star},
                                   {"mean_abs_change", res.mean_abs_change},
                                   {"objective_after", res.objective_after},
                                   {"objective_before", res.objective_before},
                                   {"targets", args.targets}});
    std::cout << "calibrate lambda_star=" << fmt9(res.lambda_star)
              << " objective_before=" << fmt9(res.objective_before)
              << " objective_after=" << fmt9(res.objective_after) << "\n";
    return kExitOk;
}

struct DistortionArgs {
    std::string original, repaired, cost = "hamming", report;
};

int cmd_distortion(const DistortionArgs& args) {
    const otdc::CsvTable to = otdc::read_csv(args.original);
    const otdc::CsvTable tr = otdc::read_csv(args.repaired);
    if (to.header != tr.header)
        throw otdc::InputError("distortion: column headers differ between files");
    otdc::CsvTable merged = to;
    merged.rows.insert(merged.rows.end(), tr.rows.begin(), tr.rows.end());
    const otdc::Schema schema = otdc::infer_schema(merged);
    const auto orig = otdc::dataset_from_csv(to, schema, args.original);
    const auto rep = otdc::dataset_from_csv(tr, schema, args.repaired);
    const otdc::DistortionReport report = otdc::statistical_distortion(
        orig.rows, rep.rows, schema, otdc::parse_cost_kind(args.cost));
    std::cout << "distortion emd=" << fmt9(report.emd)
              << " rows_changed=" << report.rows_changed << "\n";
    write_report(args.report, json{{"cost", args.cost},
                                   {"emd", report.emd},
                                   {"rows_changed", report.rows_changed}});
    return kExitOk;
}

struct SynthArgs {
    std::string data, schema_spec = "infer", kind = "noise", target, drivers, out;
    double rate = 0.0;
    std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& args) {
    const otdc::Dataset ds = load_dataset(args.data, args.schema_spec);
    otdc::CorruptionSpec spec;
    spec.kind = otdc::parse_corruption_kind(args.kind);
    spec.target_attr = args.target;
    std::stringstream ss(args.drivers);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto name = otdc::detail::trim(part);
        if (!name.empty()) spec.driver_attrs.push_back(name);
    }
    spec.rate = args.rate;
    spec.seed = args.seed;
    const otdc::CorruptionResult out = otdc::inject_corruption(ds.rows, spec, ds.schema);
    write_dataset(args.out, out.schema, out.rows);
    std::cout << "synth wrote " << out.rows.size() << " rows to " << args.out << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"otdc: optimal-transport repair of CI constraints and "
                 "threshold-independent score fairness"};
    app.require_subcommand(1);

    std::string config_path;
    CheckCiArgs check_args;
    auto* check = app.add_subcommand("check-ci", "Check a CI constraint on a dataset");
    check->add_option("--config", config_path, "flat key=value config file");
    check->add_option("--data", check_args.data, "dataset CSV")->required();
    check->add_option("--constraint", check_args.constraint, "constraint 'X;Y|Z'")
        ->required();
    check->add_option("--schema", check_args.schema_spec, "'infer' or 'A:v1,v2;B:...'");
    check->add_option("--tol", check_args.tol, "violation tolerance");
    check->add_option("--report", check_args.report, "JSON report path");

    RepairArgs repair_args;
    auto* repair = app.add_subcommand("repair", "Repair a dataset toward a CI constraint");
    repair->add_option("--config", config_path, "flat key=value config file");
    repair->add_option("--data", repair_args.data, "dataset CSV")->required();
    repair->add_option("--constraint", repair_args.constraint, "constraint 'X;Y|Z'")
        ->required();
    repair->add_option("--schema", repair_args.schema_spec, "'infer' or explicit domains");
    repair->add_option("--cost", repair_args.cost, "hamming|sqeuclid");
    repair->add_option("--epsilon", repair_args.epsilon, "entropic regularization weight");
    repair->add_option("--seed", repair_args.seed, "sampling seed");
    repair->add_option("--tol", repair_args.ci_tol, "CI tolerance on the target");
    repair->add_option("--max-iter", repair_args.max_iter, "scaling iteration cap");
    repair->add_option("--out", repair_args.out, "repaired CSV path");
    repair->add_option("--report", repair_args.report, "JSON report path");

    FairnessArgs fairness_args;
    auto* fairness = app.add_subcommand("fairness", "Threshold-independent bias panel");
    fairness->add_option("--config", config_path, "flat key=value config file");
    fairness->add_option("--scores", fairness_args.scores, "score CSV (id,score,group,label)")
        ->required();
    fairness->add_option("--report", fairness_args.report, "JSON report path");

    CalibrateArgs cal_args;
    auto* calibrate = app.add_subcommand("calibrate", "Barycenter score calibration");
    calibrate->add_option("--config", config_path, "flat key=value config file");
    calibrate->add_option("--scores", cal_args.scores, "score CSV")->required();
    calibrate->add_option("--targets", cal_args.targets, "comma list of pr,tpr,fpr");
    calibrate->add_option("--alpha", cal_args.alpha, "barycenter weight for group a");
    calibrate->add_option("--lambda-grid", cal_args.lambda_grid, "lambda search points");
    calibrate->add_option("--quantile-grid", cal_args.quantile_grid, "barycenter grid");
    calibrate->add_option("--out", cal_args.out, "calibrated score CSV path");
    calibrate->add_option("--report", cal_args.report, "JSON report path");

    DistortionArgs dist_args;
    auto* distortion = app.add_subcommand("distortion", "OT distance between two datasets");
    distortion->add_option("--config", config_path, "flat key=value config file");
    distortion->add_option("--original", dist_args.original, "original CSV")->required();
    distortion->add_option("--repaired", dist_args.repaired, "repaired CSV")->required();
    distortion->add_option("--cost", dist_args.cost, "hamming|sqeuclid");
    distortion->add_option("--report", dist_args.report, "JSON report path");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Inject synthetic noise or missingness");
    synth->add_option("--config", config_path, "flat key=value config file");
    synth->add_option("--data", synth_args.data, "dataset CSV")->required();
    synth->add_option("--kind", synth_args.kind, "noise|mar|mnar");
    synth->add_option("--target", synth_args.target, "attribute to corrupt")->required();
    synth->add_option("--drivers", synth_args.drivers, "comma list of driver attributes")
        ->required();
    synth->add_option("--rate", synth_args.rate, "corruption rate in [0,1]");
    synth->add_option("--seed", synth_args.seed, "seed");
    synth->add_option("--out", synth_args.out, "output CSV path")->required();

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config_file(std::move(args));
        std::vector<const char*> cargv;
        cargv.push_back(argv[0]);
        for (const auto& a : args) cargv.push_back(a.c_str());
        app.parse(static_cast<int>(cargv.size()), cargv.data());
        (void)read_threads_cap();
        if (check->parsed()) return cmd_check_ci(check_args);
        if (repair->parsed()) return cmd_repair(repair_args);
        if (fairness->parsed()) return cmd_fairness(fairness_args);
        if (calibrate->parsed()) return cmd_calibrate(cal_args);
        if (distortion->parsed()) return cmd_distortion(dist_args);
        if (synth->parsed()) return cmd_synth(synth_args);
        std::cerr << "no subcommand\n";
        return kExitInput;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    } catch (const otdc::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
