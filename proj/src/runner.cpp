#include "dqring/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dqring/io.hpp"

namespace dqring {

namespace {

using nlohmann::json;

std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string estimator_name(EstimatorInfo::Kind kind) {
    return kind == EstimatorInfo::Kind::exact ? "exact" : "stochastic";
}

EstimatorInfo::Kind estimator_from_name(const std::string& s) {
    if (s == "exact") return EstimatorInfo::Kind::exact;
    if (s == "stochastic") return EstimatorInfo::Kind::stochastic;
    throw std::invalid_argument("unknown estimator kind: " + s);
}

}  // namespace

std::vector<double> TimeGridSpec::points() const {
    std::vector<double> out;
    out.reserve(n_t);
    if (n_t == 1) {
        out.push_back(t_start);
        return out;
    }
    for (int k = 0; k < n_t; ++k) {
        const double f = static_cast<double>(k) / (n_t - 1);
        if (spacing == Spacing::linear)
            out.push_back(t_start + f * (t_end - t_start));
        else
            out.push_back(t_start * std::pow(t_end / t_start, f));
    }
    return out;
}

json RunConfig::to_json() const {
    json specs_j = json::array();
    for (const auto& s : specs)
        specs_j.push_back({{"n_spins", s.n_spins},
                           {"alpha", s.alpha},
                           {"coupling_j", s.coupling_j},
                           {"sign_mode", to_string(s.sign_mode)},
                           {"disorder_width", s.disorder_width},
                           {"seed", s.seed}});
    json overlays_j = json::array();
    for (const auto& o : overlays)
        overlays_j.push_back({{"path", o.path},
                              {"x_column", o.x_column},
                              {"y_column", o.y_column},
                              {"x_units", o.x_units},
                              {"label", o.label}});
    return json{{"specs", specs_j},
                {"time_grid",
                 {{"t_start", time_grid.t_start},
                  {"t_end", time_grid.t_end},
                  {"n_t", time_grid.n_t},
                  {"spacing", time_grid.spacing == TimeGridSpec::Spacing::linear ? "linear" : "log"}}},
                {"n_phi", n_phi},
                {"dt", dt},
                {"convergence_check", convergence_check},
                {"estimator",
                 {{"kind", estimator_name(estimator.kind)},
                  {"n_states", estimator.n_states},
                  {"seed", estimator.seed}}},
                {"t_s", t_s ? json(*t_s) : json(nullptr)},
                {"t_max", t_max},
                {"output_dir", output_dir},
                {"workers", workers},
                {"overlays", overlays_j},
                {"notes", notes}};
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    c.specs.clear();
    for (const auto& s : j.at("specs")) {
        RingSpec spec;
        spec.n_spins = s.at("n_spins").get<int>();
        spec.alpha = s.at("alpha").get<double>();
        spec.coupling_j = s.value("coupling_j", 1.0);
        spec.sign_mode = sign_mode_from_string(s.value("sign_mode", std::string("uniform")));
        spec.disorder_width = s.value("disorder_width", 1.0);
        spec.seed = s.value("seed", std::uint64_t{0});
        c.specs.push_back(spec);
    }
    if (j.contains("time_grid")) {
        const auto& g = j.at("time_grid");
        c.time_grid.t_start = g.value("t_start", 0.0);
        c.time_grid.t_end = g.value("t_end", 10.0);
        c.time_grid.n_t = g.value("n_t", 11);
        const std::string sp = g.value("spacing", std::string("linear"));
        if (sp != "linear" && sp != "log")
            throw std::invalid_argument("time_grid.spacing must be linear or log");
        c.time_grid.spacing =
            sp == "linear" ? TimeGridSpec::Spacing::linear : TimeGridSpec::Spacing::log;
    }
    c.n_phi = j.value("n_phi", 0);
    c.dt = j.value("dt", 0.01);
    c.convergence_check = j.value("convergence_check", false);
    if (j.contains("estimator")) {
        const auto& e = j.at("estimator");
        c.estimator.kind = estimator_from_name(e.value("kind", std::string("exact")));
        c.estimator.n_states = e.value("n_states", 8);
        c.estimator.seed = e.value("seed", std::uint64_t{1});
    }
    if (j.contains("t_s") && !j.at("t_s").is_null()) c.t_s = j.at("t_s").get<double>();
    c.t_max = j.value("t_max", 0.0);
    c.output_dir = j.value("output_dir", std::string("out"));
    c.workers = j.value("workers", 1);
    if (j.contains("overlays")) {
        for (const auto& o : j.at("overlays")) {
            OverlayConfig ov;
            ov.path = o.at("path").get<std::string>();
            ov.x_column = o.at("x_column").get<std::string>();
            ov.y_column = o.at("y_column").get<std::string>();
            ov.x_units = o.value("x_units", std::string("hbar/J"));
            ov.label = o.value("label", std::string("reference"));
            c.overlays.push_back(ov);
        }
    }
    if (j.contains("notes")) c.notes = j.at("notes").get<std::vector<std::string>>();
    return c;
}

void validate_config(const RunConfig& config) {
    if (config.specs.empty()) throw std::invalid_argument("config: no ring specs");
    for (const auto& spec : config.specs) {
        validate(spec);
        if (config.estimator.kind == EstimatorInfo::Kind::exact &&
            spec.n_spins > kExactEstimatorMaxSpins)
            throw std::invalid_argument("config: N = " + std::to_string(spec.n_spins) +
                                        " with the exact estimator exceeds the N <= " +
                                        std::to_string(kExactEstimatorMaxSpins) + " cutoff (spec " +
                                        spec_label(spec) + ")");
    }
    if (config.time_grid.n_t < 1) throw std::invalid_argument("config: time_grid.n_t < 1");
    if (config.time_grid.t_start < 0.0 || config.time_grid.t_end < config.time_grid.t_start)
        throw std::invalid_argument("config: bad time window");
    if (config.time_grid.spacing == TimeGridSpec::Spacing::log && config.time_grid.t_start <= 0.0)
        throw std::invalid_argument("config: log spacing needs t_start > 0");
    if (!(config.dt > 0.0)) throw std::invalid_argument("config: dt must be > 0");
    if (config.estimator.n_states < 1) throw std::invalid_argument("config: n_states < 1");
    if (config.workers < 1) throw std::invalid_argument("config: workers < 1");
    if (config.n_phi != 0) {
        if (config.n_phi < 2 || (config.n_phi & (config.n_phi - 1)) != 0)
            throw std::invalid_argument("config: n_phi must be 0 or a power of two");
        for (const auto& spec : config.specs)
            if (config.n_phi < 2 * spec.n_spins + 2)
                throw std::invalid_argument("config: n_phi below 2N+2 for " + spec_label(spec));
    }
    if (config.t_max < 0.0) throw std::invalid_argument("config: t_max < 0");
    if (config.t_s && *config.t_s < 0.0) throw std::invalid_argument("config: t_s < 0");
}

std::string spec_label(const RingSpec& spec) {
    std::string label = "N" + std::to_string(spec.n_spins) + "_a" + format_g(spec.alpha);
    if (spec.sign_mode == SignMode::random_sign) label += "_rs";
    label += "_s" + std::to_string(spec.seed);
    return label;
}

json RunManifest::to_json() const {
    return json{{"config_hash", config_hash},
                {"code_version", code_version},
                {"task_seconds", task_seconds},
                {"files", file_checksums},
                {"warnings", warnings},
                {"seeds", seeds}};
}

namespace {

struct SpecResult {
    std::string label;
    std::map<std::string, std::string> files;  // relpath -> content
    std::vector<std::string> warnings;
    std::map<std::string, std::uint64_t> seeds;
    double seconds = 0.0;
    bool skipped = false;
};

struct ParsedCsv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return static_cast<int>(k);
        return -1;
    }
};

ParsedCsv parse_csv(const std::string& text) {
    ParsedCsv out;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            cells.push_back(line.substr(pos, comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (first) {
            out.header = std::move(cells);
            first = false;
        } else {
            out.rows.push_back(std::move(cells));
        }
    }
    return out;
}

double saturation_onset(const RunConfig& config, const RingSpec& spec) {
    return config.t_s ? *config.t_s : default_saturation_time(spec.alpha);
}

double saturation_end(const RunConfig& config) {
    return config.t_max > 0.0 ? std::min(config.t_max, config.time_grid.t_end)
                              : config.time_grid.t_end;
}

void append_saturation_rows(io::CsvBuilder& csv, const std::string& target,
                            const SaturationStats& stats) {
    csv.begin_row();
    csv.add(target);
    csv.add(std::string("aggregate"));
    csv.add(-1);
    csv.add(stats.mean);
    csv.add(stats.sd);
    csv.add(stats.site_variance_avg);
    csv.add(stats.total_covariance);
    csv.add(stats.t_s);
    csv.add(stats.t_max);
    for (std::size_t i = 0; i < stats.site_mean.size(); ++i) {
        csv.begin_row();
        csv.add(target);
        csv.add(std::string("site"));
        csv.add(static_cast<long long>(i));
        csv.add(stats.site_mean[i]);
        csv.add(stats.site_sd[i]);
        csv.add(0.0);
        csv.add(0.0);
        csv.add(stats.t_s);
        csv.add(stats.t_max);
    }
}

SpecResult compute_spec(const RunConfig& config, const RingSpec& spec) {
    const auto t_begin = std::chrono::steady_clock::now();
    SpecResult result;
    result.label = spec_label(spec);
    const int n = spec.n_spins;

    const CouplingTable couplings = build_couplings(spec);
    const TrotterPlan plan = make_trotter_plan(couplings, config.dt);
    const PhiGrid grid = PhiGrid::make(config.n_phi ? config.n_phi : PhiGrid::default_size(n));
    const std::vector<double> times = config.time_grid.points();

    EstimatorInfo est;
    est.kind = config.estimator.kind;
    est.n_states = config.estimator.n_states;
    est.seed = detail::state_seed(config.estimator.seed, spec.seed);
    const bool exact = est.kind == EstimatorInfo::Kind::exact;
    result.seeds["ring"] = spec.seed;
    result.seeds["estimator"] = est.seed;

    {
        io::CsvBuilder csv({"i", "j", "r", "d"});
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                csv.begin_row();
                csv.add(i);
                csv.add(j);
                csv.add(bond_distance(i, j, n));
                csv.add(couplings.coupling(i, j));
            }
        result.files[result.label + "/couplings.csv"] = csv.text();
    }
    {
        io::CsvBuilder csv({"i", "h"});
        for (int i = 0; i < n; ++i) {
            csv.begin_row();
            csv.add(i);
            csv.add(couplings.h[i]);
        }
        result.files[result.label + "/fields.csv"] = csv.text();
    }

    const KSeries series = compute_k_series(couplings, plan, times, grid, est);

    {
        io::CsvBuilder echo_csv({"t", "phi", "i", "j", "re", "im", "stderr"});
        io::CsvBuilder dec_csv({"t", "phi", "m_g", "m_l", "m_ct"});
        io::CsvBuilder dist_csv({"t", "phi", "n", "value"});
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            std::optional<StochasticEchoResult> stoch;
            if (!exact) {
                stoch.emplace();
                stoch->n_spins = n;
                stoch->t = times[ti];
                stoch->seed = est.seed;
                stoch->states = series.state_tensors[ti];
            }
            for (double phi : grid.phi) {
                const EchoMatrix echo =
                    exact ? series.tensors[ti].echo_at(phi) : stoch->echo_at(phi);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        echo_csv.begin_row();
                        echo_csv.add(times[ti]);
                        echo_csv.add(phi);
                        echo_csv.add(i);
                        echo_csv.add(j);
                        echo_csv.add(echo.at(i, j).real());
                        echo_csv.add(echo.at(i, j).imag());
                        echo_csv.add(echo.std_error_at(i, j));
                    }
                const EchoDecomposition dec = decompose_echo(echo);
                dec_csv.begin_row();
                dec_csv.add(times[ti]);
                dec_csv.add(phi);
                dec_csv.add(dec.m_g);
                dec_csv.add(dec.m_l);
                dec_csv.add(dec.m_ct);
                for (int nd = 0; nd <= n / 2; ++nd) {
                    dist_csv.begin_row();
                    dist_csv.add(times[ti]);
                    dist_csv.add(phi);
                    dist_csv.add(nd);
                    dist_csv.add(distance_echo(echo, nd));
                }
            }
        }
        result.files[result.label + "/echo.csv"] = echo_csv.text();
        result.files[result.label + "/echoes.csv"] = dec_csv.text();
        result.files[result.label + "/distance_echo.csv"] = dist_csv.text();
    }

    {
        io::CsvBuilder csv({"t", "source", "m", "g", "g_err"});
        auto rows = [&](const CoherenceSpectrum& spec_row) {
            for (int m = spec_row.m_min(); m <= spec_row.m_max(); ++m) {
                csv.begin_row();
                csv.add(spec_row.t);
                csv.add(spec_row.source);
                csv.add(m);
                csv.add(spec_row.at(m));
                csv.add(spec_row.err_at(m));
            }
        };
        for (const auto& set : series.spectra) {
            rows(set.global);
            rows(set.local);
            rows(set.cross);
            for (const auto& s : set.local_site) rows(s);
            for (const auto& s : set.cross_site) rows(s);
        }
        result.files[result.label + "/spectra.csv"] = csv.text();
    }

    {
        io::CsvBuilder csv({"t", "k_g", "k_l", "k_ct", "err_g", "err_l", "err_ct"});
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            csv.begin_row();
            csv.add(times[ti]);
            csv.add(series.k_g[ti]);
            csv.add(series.k_l[ti]);
            csv.add(series.k_ct[ti]);
            csv.add(exact ? 0.0 : series.err_g[ti]);
            csv.add(exact ? 0.0 : series.err_l[ti]);
            csv.add(exact ? 0.0 : series.err_ct[ti]);
        }
        result.files[result.label + "/kseries.csv"] = csv.text();
    }
    {
        io::CsvBuilder csv({"t", "i", "k_g", "k_l", "k_ct"});
        for (std::size_t ti = 0; ti < times.size(); ++ti)
            for (int i = 0; i < n; ++i) {
                csv.begin_row();
                csv.add(times[ti]);
                csv.add(i);
                csv.add(series.k_g_site[i][ti]);
                csv.add(series.k_l_site[i][ti]);
                csv.add(series.k_ct_site[i][ti]);
            }
        result.files[result.label + "/kseries_site.csv"] = csv.text();
    }

    json summary{{"label", result.label},
                 {"n_spins", n},
                 {"alpha", spec.alpha},
                 {"sign_mode", to_string(spec.sign_mode)},
                 {"seed", spec.seed},
                 {"estimator", estimator_name(est.kind)},
                 {"n_states", est.n_states}};

    const double t_s = saturation_onset(config, spec);
    const double t_max = saturation_end(config);
    bool window_ok = t_s < t_max && times.front() <= t_s && times.back() >= t_max;
    if (window_ok) {
        int in_window = 0;
        for (double t : times)
            if (t >= t_s && t <= t_max) ++in_window;
        window_ok = in_window >= 2;
    }
    if (window_ok) {
        const SaturationStats sat_g = saturation_stats(times, series.k_g_site, t_s, t_max);
        const SaturationStats sat_l = saturation_stats(times, series.k_l_site, t_s, t_max);
        const SaturationStats sat_ct = saturation_stats(times, series.k_ct_site, t_s, t_max);
        io::CsvBuilder csv({"target", "scope", "i", "mean", "sd", "site_variance_avg",
                            "total_covariance", "t_s", "t_max"});
        append_saturation_rows(csv, "K_G", sat_g);
        append_saturation_rows(csv, "K_L", sat_l);
        append_saturation_rows(csv, "K_CT", sat_ct);
        result.files[result.label + "/saturation.csv"] = csv.text();
        summary["saturation"] = {{"t_s", t_s},
                                 {"t_max", t_max},
                                 {"k_g_mean", sat_g.mean},
                                 {"k_l_mean", sat_l.mean},
                                 {"k_ct_mean", sat_ct.mean},
                                 {"k_ct_sd", sat_ct.sd},
                                 {"k_ct_site_variance_avg", sat_ct.site_variance_avg},
                                 {"k_ct_total_covariance", sat_ct.total_covariance}};
    } else {
        result.warnings.push_back(result.label +
                                  ": time grid does not cover the saturation window [" +
                                  format_g(t_s) + ", " + format_g(t_max) + "]; stats skipped");
    }

    if (config.convergence_check) {
        // Probe one grid time with a halved step; relative K_G change.
        double probe = times[times.size() / 2];
        if (probe <= 0.0) probe = times.back();
        if (probe > 0.0) {
            const TrotterPlan plan_half = make_trotter_plan(couplings, 0.5 * config.dt);
            const KSeries coarse = compute_k_series(couplings, plan, {probe}, grid, est);
            const KSeries fine = compute_k_series(couplings, plan_half, {probe}, grid, est);
            const double rel =
                std::abs(fine.k_g[0] - coarse.k_g[0]) / std::max(std::abs(fine.k_g[0]), 1e-30);
            summary["convergence"] = {{"probe_t", probe},
                                      {"k_g_dt", coarse.k_g[0]},
                                      {"k_g_half_dt", fine.k_g[0]},
                                      {"rel_change", rel}};
            if (rel > 1e-3)
                result.warnings.push_back(result.label + ": Trotter convergence probe rel change " +
                                          format_g(rel) + " exceeds 1e-3");
        }
    }

    json sidecar{{"estimator", estimator_name(est.kind)},
                 {"n_states", est.n_states},
                 {"seed", est.seed},
                 {"dt", config.dt},
                 {"n_phi", grid.n_phi}};
    result.files[result.label + "/estimator.json"] = sidecar.dump(2) + "\n";
    result.files[result.label + "/summary.json"] = summary.dump(2) + "\n";

    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return result;
}

void build_plotpack(const std::filesystem::path& root, const std::vector<std::string>& labels,
                    RunManifest& manifest) {
    io::CsvBuilder kcsv({"spec", "t", "quantity", "value", "err"});
    io::CsvBuilder ecsv({"spec", "t", "phi", "quantity", "value"});
    io::CsvBuilder scsv({"spec", "t", "source", "m", "g", "g_err"});
    for (const auto& label : labels) {
        const ParsedCsv k = parse_csv(io::read_file(root / label / "kseries.csv"));
        for (const auto& row : k.rows) {
            const char* names[3] = {"K_G", "K_L", "K_CT"};
            for (int q = 0; q < 3; ++q) {
                kcsv.begin_row();
                kcsv.add(label);
                kcsv.add(row[0]);
                kcsv.add(std::string(names[q]));
                kcsv.add(row[1 + q]);
                kcsv.add(row[4 + q]);
            }
        }
        const ParsedCsv e = parse_csv(io::read_file(root / label / "echoes.csv"));
        for (const auto& row : e.rows) {
            const char* names[3] = {"M_G", "M_L", "M_CT"};
            for (int q = 0; q < 3; ++q) {
                ecsv.begin_row();
                ecsv.add(label);
                ecsv.add(row[0]);
                ecsv.add(row[1]);
                ecsv.add(std::string(names[q]));
                ecsv.add(row[2 + q]);
            }
        }
        const ParsedCsv s = parse_csv(io::read_file(root / label / "spectra.csv"));
        for (const auto& row : s.rows) {
            if (row[1] != "G" && row[1] != "L" && row[1] != "CT") continue;
            scsv.begin_row();
            scsv.add(label);
            scsv.add(row[0]);
            scsv.add(row[1]);
            scsv.add(row[2]);
            scsv.add(row[3]);
            scsv.add(row[4]);
        }
    }
    const std::map<std::string, std::string> files = {{"plotpack/kseries.csv", kcsv.text()},
                                                      {"plotpack/echoes.csv", ecsv.text()},
                                                      {"plotpack/spectra.csv", scsv.text()}};
    for (const auto& [rel, content] : files) {
        io::write_file(root / rel, content);
        manifest.file_checksums[rel] = io::hex64(io::fnv1a64(content));
    }
}

void build_scaling(const std::filesystem::path& root, const std::vector<std::string>& labels,
                   RunManifest& manifest) {
    struct Point {
        int n;
        double value;
    };
    std::map<std::string, std::vector<Point>> groups;
    for (const auto& label : labels) {
        const json summary = json::parse(io::read_file(root / label / "summary.json"));
        if (!summary.contains("saturation")) continue;
        const std::string key = "a" + format_g(summary.at("alpha").get<double>()) + "_" +
                                summary.at("sign_mode").get<std::string>() + "_" +
                                summary.at("estimator").get<std::string>();
        const int n = summary.at("n_spins").get<int>();
        groups[key].push_back({n, summary.at("saturation").at("k_ct_mean").get<double>() / n});
    }
    json out;
    out["groups"] = json::array();
    for (auto& [key, points] : groups) {
        std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) { return a.n < b.n; });
        json group{{"key", key}, {"points", json::array()}};
        std::vector<double> ns, ys;
        for (const auto& p : points) {
            group["points"].push_back({{"n_spins", p.n}, {"k_ct_mean_per_n", p.value}});
            ns.push_back(p.n);
            ys.push_back(p.value);
        }
        std::set<double> distinct(ns.begin(), ns.end());
        bool positive = true;
        for (double y : ys) positive = positive && y > 0.0;
        if (distinct.size() >= 3 && positive) {
            for (ScalingModel model : {ScalingModel::power, ScalingModel::exponential}) {
                const ScalingFit fit = scaling_fit(ns, ys, model);
                group["fits"][to_string(model)] = {{"exponent", fit.exponent},
                                                   {"exponent_stderr", fit.exponent_stderr},
                                                   {"intercept", fit.intercept},
                                                   {"residual_rms", fit.residual_rms},
                                                   {"residuals", fit.residuals}};
            }
            // Exponent window reported for larger rings than simulated here;
            // recorded for comparison, never asserted.
            group["reference_exponent_window"] = {-4.3, -3.1};
        }
        out["groups"].push_back(std::move(group));
    }
    const std::string content = out.dump(2) + "\n";
    io::write_file(root / "scaling.json", content);
    manifest.file_checksums["scaling.json"] = io::hex64(io::fnv1a64(content));
}

}  // namespace

void overlay_reference(const OverlayConfig& overlay, const std::string& output_dir,
                       RunManifest& manifest) {
    std::string text;
    try {
        text = io::read_file(overlay.path);
    } catch (const std::exception& e) {
        manifest.warnings.push_back("overlay " + overlay.label + ": " + e.what() + "; skipped");
        return;
    }
    const ParsedCsv csv = parse_csv(text);
    if (csv.header.empty() || csv.rows.empty()) {
        manifest.warnings.push_back("overlay " + overlay.label + ": empty reference file; skipped");
        return;
    }
    const int xc = csv.column(overlay.x_column);
    const int yc = csv.column(overlay.y_column);
    if (xc < 0 || yc < 0)
        throw std::runtime_error("overlay " + overlay.label + ": columns " + overlay.x_column +
                                 "/" + overlay.y_column + " not found in " + overlay.path);
    if (overlay.x_units != "hbar/J" && overlay.x_units != "rad")
        manifest.warnings.push_back("overlay " + overlay.label + ": x units '" + overlay.x_units +
                                    "' do not match the simulated units (hbar/J or rad)");
    io::CsvBuilder out({"x", "value", "x_units", "source"});
    for (const auto& row : csv.rows) {
        out.begin_row();
        out.add(row[xc]);
        out.add(row[yc]);
        out.add(overlay.x_units);
        out.add(std::string("reference"));
    }
    const std::string rel = "overlays/" + overlay.label + ".csv";
    io::write_file(std::filesystem::path(output_dir) / rel, out.text());
    manifest.file_checksums[rel] = io::hex64(io::fnv1a64(out.text()));
}

RunManifest run(const RunConfig& config) {
    validate_config(config);
    const std::filesystem::path root(config.output_dir);
    std::filesystem::create_directories(root);

    RunManifest manifest;
    manifest.code_version = kCodeVersion;
    manifest.config_hash = io::hex64(io::fnv1a64(config.to_json().dump()));
    for (const auto& note : config.notes) manifest.warnings.push_back("note: " + note);

    // Previous manifest enables skipping: a spec is reused when every file it
    // produced last time is still on disk with an unchanged checksum.
    json old_manifest;
    bool have_old = false;
    if (std::filesystem::exists(root / "manifest.json")) {
        try {
            old_manifest = json::parse(io::read_file(root / "manifest.json"));
            have_old = old_manifest.value("config_hash", std::string()) == manifest.config_hash;
        } catch (const std::exception&) {
            have_old = false;
        }
    }
    auto spec_reusable = [&](const std::string& label) {
        if (!have_old || !old_manifest.contains("files")) return false;
        bool any = false;
        for (const auto& [rel, checksum] : old_manifest.at("files").items()) {
            if (rel.rfind(label + "/", 0) != 0) continue;
            any = true;
            const auto path = root / rel;
            if (!std::filesystem::exists(path)) return false;
            if (io::hex64(io::fnv1a64(io::read_file(path))) != checksum.get<std::string>())
                return false;
        }
        return any;
    };

    const std::size_t n_specs = config.specs.size();
    std::vector<SpecResult> results(n_specs);
    std::vector<char> skip(n_specs, 0);
    for (std::size_t k = 0; k < n_specs; ++k)
        skip[k] = spec_reusable(spec_label(config.specs[k])) ? 1 : 0;

    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= n_specs) break;
            if (skip[k]) {
                results[k].label = spec_label(config.specs[k]);
                results[k].skipped = true;
                continue;
            }
            try {
                results[k] = compute_spec(config, config.specs[k]);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                errors.push_back(spec_label(config.specs[k]) + ": " + e.what());
            }
        }
    };
    const int n_workers = std::min<std::size_t>(config.workers, n_specs);
    std::vector<std::thread> threads;
    for (int w = 1; w < n_workers; ++w) threads.emplace_back(worker);
    worker();
    for (auto& th : threads) th.join();

    // Single writer, fixed spec order: outputs are independent of scheduling.
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < n_specs; ++k) {
        const SpecResult& res = results[k];
        if (res.label.empty()) continue;  // failed task; partial results stay on disk
        labels.push_back(res.label);
        if (res.skipped) {
            for (const auto& [rel, checksum] : old_manifest.at("files").items())
                if (rel.rfind(res.label + "/", 0) == 0)
                    manifest.file_checksums[rel] = checksum.get<std::string>();
            manifest.task_seconds[res.label] = 0.0;
            continue;
        }
        for (const auto& [rel, content] : res.files) {
            io::write_file(root / rel, content);
            manifest.file_checksums[rel] = io::hex64(io::fnv1a64(content));
        }
        manifest.task_seconds[res.label] = res.seconds;
        for (const auto& w : res.warnings) manifest.warnings.push_back(w);
        for (const auto& [name, seed] : res.seeds)
            manifest.seeds[res.label + "/" + name] = seed;
    }
    for (const auto& err : errors) manifest.warnings.push_back("failed: " + err);

    if (errors.empty()) {
        build_scaling(root, labels, manifest);
        build_plotpack(root, labels, manifest);
    }
    for (const auto& overlay : config.overlays) overlay_reference(overlay, config.output_dir, manifest);

    io::write_file(root / "manifest.json", manifest.to_json().dump(2) + "\n");
    if (!errors.empty()) {
        std::string msg = "run failed for " + std::to_string(errors.size()) + " spec(s): ";
        for (const auto& err : errors) msg += "\n  " + err;
        throw std::runtime_error(msg);
    }
    return manifest;
}

RunConfig preset(const std::string& name) {
    RunConfig c;
    c.specs.clear();
    auto capped = [&](int n_desired, EstimatorInfo::Kind kind) {
        const int cap =
            kind == EstimatorInfo::Kind::exact ? kPresetExactMaxSpins : kPresetStochasticMaxSpins;
        if (n_desired > cap)
            c.notes.push_back("preset " + name + ": N capped from " + std::to_string(n_desired) +
                              " to " + std::to_string(cap));
        return std::min(n_desired, cap);
    };
    auto add_spec = [&](int n, double alpha, SignMode mode) {
        RingSpec s;
        s.n_spins = n;
        s.alpha = alpha;
        s.sign_mode = mode;
        s.seed = 1;
        c.specs.push_back(s);
    };
    if (name == "fig2") {
        // Echo curves and coherence spectra vs phi at one size, alpha = 3.
        add_spec(capped(16, c.estimator.kind), 3.0, SignMode::uniform);
        c.time_grid = {0.0, 100.0, 41, TimeGridSpec::Spacing::linear};
    } else if (name == "fig3") {
        for (double alpha : {3.0, 2.0, 1.0})
            for (int n : {8, 10, 12})
                add_spec(capped(n, c.estimator.kind), alpha, SignMode::uniform);
        for (int n : {8, 10, 12}) add_spec(capped(n, c.estimator.kind), 1.0, SignMode::random_sign);
        c.time_grid = {0.0, 100.0, 41, TimeGridSpec::Spacing::linear};
    } else if (name == "fig4") {
        // Growth window, log-spaced times for the short-time law.
        for (double alpha : {3.0, 2.0, 1.0})
            add_spec(capped(16, c.estimator.kind), alpha, SignMode::uniform);
        c.time_grid = {0.01, 10.0, 31, TimeGridSpec::Spacing::log};
    } else if (name == "fig5" || name == "fig6") {
        for (double alpha : {3.0, 2.0, 1.0})
            for (int n : {8, 10, 12})
                add_spec(capped(n, c.estimator.kind), alpha, SignMode::uniform);
        c.time_grid = {0.0, 100.0, 26, TimeGridSpec::Spacing::linear};
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    c.output_dir = "out_" + name;
    return c;
}

}  // namespace dqring
