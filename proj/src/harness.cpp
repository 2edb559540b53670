// SPDX-License-Identifier: Apache-2.0
//
// gee-precoder: energy-efficient MIMO precoding under imperfect CSI
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "geeprec/harness.hpp"

#include "geeprec/channel.hpp"
#include "geeprec/metrics.hpp"
#include "geeprec/rng.hpp"
#include "geeprec/stat_robust.hpp"
#include "geeprec/worstcase.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace geeprec {

double dbw_to_watts(double x)
{
    return std::pow(10.0, x / 10.0);
}

std::string to_string(SolverKind kind)
{
    return kind == SolverKind::Statistical ? "statistical" : "worstcase";
}

std::string to_string(SweepVariable var)
{
    return var == SweepVariable::SigmaDelta2 ? "sigma_delta2" : "eps";
}

SolverKind solver_from_string(const std::string& s)
{
    if (s == "statistical")
        return SolverKind::Statistical;
    if (s == "worstcase")
        return SolverKind::WorstCase;
    throw ConfigError("solver must be statistical or worstcase, got " + s);
}

SweepVariable sweep_variable_from_string(const std::string& s)
{
    if (s == "sigma_delta2")
        return SweepVariable::SigmaDelta2;
    if (s == "eps")
        return SweepVariable::Eps;
    throw ConfigError("sweep variable must be sigma_delta2 or eps, got " + s);
}

void ExperimentSpec::validate() const
{
    if (trials < 1)
        throw ConfigError("trials must be at least 1");
    if (threads < 0)
        throw ConfigError("threads must be non-negative");
    if (values.empty())
        throw ConfigError("sweep needs at least one value");
    for (double v : values)
        if (!std::isfinite(v) || v < 0.0)
            throw ConfigError("sweep values must be finite and non-negative");
    if (!std::is_sorted(values.begin(), values.end()))
        throw ConfigError("sweep values must be sorted");
    if ((solver == SolverKind::Statistical) != (variable == SweepVariable::SigmaDelta2))
        throw ConfigError("the " + to_string(solver) + " solver cannot sweep " + to_string(variable));
    for (const auto& cfg : configs()) {
        cfg.validate();
        if (!shaping.empty())
            uncertainty(cfg, 0.0).validate(cfg.K, cfg.N);
    }
}

std::vector<SystemConfig> ExperimentSpec::configs() const
{
    if (antennas.empty())
        return {base};
    std::vector<SystemConfig> out;
    for (int m : antennas) {
        SystemConfig cfg = base;
        cfg.M = m;
        cfg.N = m;
        out.push_back(cfg);
    }
    return out;
}

NormBoundedError ExperimentSpec::uncertainty(const SystemConfig& cfg, double eps) const
{
    NormBoundedError model = NormBoundedError::spherical(cfg.K, cfg.N, eps);
    if (shaping.empty())
        return model;
    if (static_cast<int>(shaping.size()) != cfg.K)
        throw ConfigError("shaping must be K x K");
    for (int i = 0; i < cfg.K; ++i) {
        if (static_cast<int>(shaping[i].size()) != cfg.K)
            throw ConfigError("shaping must be K x K");
        for (int j = 0; j < cfg.K; ++j)
            model.B(i, j) = shaping[i][j] * MatC::Identity(cfg.N, cfg.N);
    }
    return model;
}

void to_json(json& j, const ExperimentSpec& spec)
{
    j = {{"base", spec.base},
         {"antennas", spec.antennas},
         {"sweep", {{"variable", to_string(spec.variable)}, {"values", spec.values}}},
         {"trials", spec.trials},
         {"seed", spec.seed},
         {"solver", to_string(spec.solver)},
         {"output", spec.output},
         {"threads", spec.threads}};
    if (!spec.shaping.empty())
        j["shaping"] = spec.shaping;
}

void from_json(const json& j, ExperimentSpec& spec)
{
    static const char* known[] = {"base",   "antennas", "sweep",   "trials", "seed",
                                  "solver", "output",   "threads", "shaping"};
    for (const auto& item : j.items())
        if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known))
            throw ConfigError("unknown spec field: " + item.key());
    spec = ExperimentSpec{};
    if (j.contains("base"))
        spec.base = j.at("base").get<SystemConfig>();
    spec.antennas = j.value("antennas", std::vector<int>{});
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        spec.variable = sweep_variable_from_string(s.at("variable").get<std::string>());
        spec.values = s.at("values").get<std::vector<double>>();
    }
    spec.trials = j.value("trials", spec.trials);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("solver"))
        spec.solver = solver_from_string(j.at("solver").get<std::string>());
    else
        spec.solver = spec.variable == SweepVariable::Eps ? SolverKind::WorstCase : SolverKind::Statistical;
    spec.output = j.value("output", std::string());
    spec.threads = j.value("threads", 0);
    spec.shaping = j.value("shaping", std::vector<std::vector<double>>{});
}

std::uint64_t trial_seed(std::uint64_t master, int trial)
{
    return splitmix64(master ^ static_cast<std::uint64_t>(trial));
}

namespace {

struct Job {
    std::size_t value_index;
    std::size_t config_index;
    int trial;
};

SweepRow run_job(const ExperimentSpec& spec, const SystemConfig& cfg, double value, int trial)
{
    SweepRow row;
    row.sweep_value = value;
    row.M = cfg.M;
    row.trial = trial;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        // channels depend on (trial, M) only, so every sweep value sees the same draws
        const ChannelSet est = generate_channels(cfg, derive_seed(trial_seed(spec.seed, trial),
                                                                  static_cast<std::uint64_t>(cfg.M)));
        PrecoderSet V;
        GeeReport report;
        if (spec.solver == SolverKind::Statistical) {
            auto res = run_statistical(est, cfg, value);
            V = std::move(res.precoders);
            report = std::move(res.report);
        } else {
            auto res = run_worstcase(est, cfg, spec.uncertainty(cfg, value));
            V = std::move(res.precoders);
            report = std::move(res.report);
        }
        row.gee = report.gee;
        row.rates = report.rates;
        row.iterations = report.iterations;
        row.nominal_gee = gee(est, V, mmse_receivers(est, V, cfg), cfg).gee;
        row.status = report.converged ? "ok" : "unconverged";
        row.message = report.warning;
    } catch (const Error& e) {
        row.status = "failed";
        row.message = e.what();
        row.gee = std::numeric_limits<double>::quiet_NaN();
        row.nominal_gee = row.gee;
        row.rates.assign(static_cast<std::size_t>(cfg.K), row.gee);
    }
    row.wallclock_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

} // namespace

SweepResult run_sweep(const ExperimentSpec& spec, const ProgressFn& progress)
{
    spec.validate();
    const auto configs = spec.configs();
    std::vector<Job> jobs;
    for (std::size_t v = 0; v < spec.values.size(); ++v)
        for (std::size_t c = 0; c < configs.size(); ++c)
            for (int t = 0; t < spec.trials; ++t)
                jobs.push_back({v, c, t});

    std::vector<SweepRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            const Job& job = jobs[k];
            rows[k] = run_job(spec, configs[job.config_index], spec.values[job.value_index], job.trial);
            const std::size_t n = ++done;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(n, jobs.size());
            }
        }
    };
    unsigned threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads) : std::thread::hardware_concurrency();
    threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();

    SweepResult result;
    for (const auto& r : rows)
        if (r.status == "failed")
            ++result.failures;
    result.rows = rows;

    const auto K = static_cast<std::size_t>(spec.base.K);
    for (std::size_t v = 0; v < spec.values.size(); ++v)
        for (std::size_t c = 0; c < configs.size(); ++c) {
            SweepRow s;
            s.summary = true;
            s.sweep_value = spec.values[v];
            s.M = configs[c].M;
            s.rates.assign(K, 0.0);
            int ok = 0;
            for (std::size_t k = 0; k < jobs.size(); ++k) {
                if (jobs[k].value_index != v || jobs[k].config_index != c || rows[k].status == "failed")
                    continue;
                ++ok;
                s.gee += rows[k].gee;
                s.nominal_gee += rows[k].nominal_gee;
                s.iterations += rows[k].iterations;
                s.wallclock_ms += rows[k].wallclock_ms;
                for (std::size_t q = 0; q < K; ++q)
                    s.rates[q] += rows[k].rates[q];
            }
            const double scale = ok > 0 ? 1.0 / ok : std::numeric_limits<double>::quiet_NaN();
            s.gee *= scale;
            s.nominal_gee *= scale;
            s.iterations *= scale;
            s.wallclock_ms *= scale;
            for (auto& r : s.rates)
                r *= scale;
            s.status = std::to_string(ok) + "/" + std::to_string(spec.trials) + " ok";
            result.rows.push_back(std::move(s));
        }
    return result;
}

void write_csv(std::ostream& out, const ExperimentSpec& spec, const SweepResult& result, bool include_wallclock)
{
    out << "# gee-precoder sweep, schema " << kCsvSchemaVersion << ", solver " << to_string(spec.solver)
        << ", seed " << spec.seed << '\n';
    out << "kind,sweep_var,sweep_value,M,trial,status,gee,nominal_gee,iterations";
    if (include_wallclock)
        out << ",wallclock_ms";
    for (int k = 1; k <= spec.base.K; ++k)
        out << ",rate_" << k;
    out << '\n';

    std::ostringstream line;
    line << std::setprecision(12);
    for (const auto& r : result.rows) {
        line.str("");
        line << (r.summary ? "summary" : "trial") << ',' << to_string(spec.variable) << ',' << r.sweep_value << ','
             << r.M << ',';
        if (!r.summary)
            line << r.trial;
        line << ',' << r.status << ',' << r.gee << ',' << r.nominal_gee << ',' << r.iterations;
        if (include_wallclock)
            line << ',' << std::setprecision(4) << r.wallclock_ms << std::setprecision(12);
        for (double rate : r.rates)
            line << ',' << rate;
        out << line.str() << '\n';
    }
}

// ----- self check -------------------------------------------------------------

std::vector<CheckResult> run_self_check(std::uint64_t seed)
{
    std::vector<CheckResult> out;
    auto record = [&](const std::string& name, bool ok, double value) {
        std::ostringstream s;
        s << std::setprecision(3) << value;
        out.push_back({name, ok, s.str()});
    };

    SystemConfig cfg;
    cfg.K = 2;
    cfg.M = 2;
    cfg.N = 2;
    cfg.d = 1;
    cfg.P_m = 1.0;
    cfg.P_cir = dbw_to_watts(-5.0);
    cfg.rho = 1.0 / 0.38;
    const ChannelSet H = generate_channels(cfg, seed);
    const PrecoderSet V = random_precoders(cfg, derive_seed(seed, 3));
    const DecoderSet U = mmse_receivers(H, V, cfg);

    double err = 0.0;
    for (int k = 0; k < cfg.K; ++k)
        err = std::max(err, std::abs(user_rate(H, V, U, cfg, k) + log2_det_hpd(mse_matrix(H, V, U, cfg, k))));
    record("wmmse identity", err <= 1e-8, err);

    const SurrogateData sur = build_surrogate(H, V, cfg, 0.05);
    err = std::abs(surrogate_objective(sur, V, cfg, 0.3) - statistical_objective(H, V, cfg, 0.05, 0.3));
    record("surrogate tangency", err <= 1e-8, err);

    const QcqpSolution q = solve_qcqp(sur.Psi[0], sur.b[0], 0.3 * std::numbers::ln2, cfg.rho, cfg.P_m);
    const double slack = cfg.P_m - q.x.squaredNorm();
    record("qcqp feasibility", slack >= -1e-12 && q.lambda >= 0.0 && q.lambda * std::abs(slack) <= 1e-8, slack);

    const WeightSet G = nominal_weights(H, V, U, cfg);
    const NormBoundedError ball = NormBoundedError::spherical(cfg.K, cfg.N, 0.1);
    const ErrorRealization D = sample_error(cfg, ball, derive_seed(seed, 2));
    const ErrorTermPair terms = assemble_error_terms(H, V, U, G, cfg);
    const ChannelSet Ht = compose(H, D);
    err = 0.0;
    for (int i = 0; i < cfg.K; ++i) {
        double rhs = 0.0;
        for (int j = 0; j < cfg.K; ++j)
            rhs += (terms.e(i, j) + terms.E(i, j) * error_coordinates(D.Delta(i, j))).squaredNorm();
        err = std::max(err, std::abs(weighted_mse(Ht, V, U, G, cfg, i) - rhs));
    }
    record("trace decomposition", err <= 1e-10, err);

    const auto stat = run_statistical(H, cfg, 0.05);
    double drop = 0.0;
    for (std::size_t t = 1; t < stat.dinkelbach.etas.size(); ++t)
        drop = std::max(drop, stat.dinkelbach.etas[t - 1] - stat.dinkelbach.etas[t]);
    record("dinkelbach monotone", drop <= 1e-6 && stat.report.converged, drop);

    const auto wc = run_worstcase(H, cfg, ball);
    const double nominal = gee(H, wc.precoders, mmse_receivers(H, wc.precoders, cfg), cfg).gee;
    record("worst case below nominal", wc.report.gee <= nominal + 1e-9, nominal - wc.report.gee);

    double power = 0.0;
    for (const auto& v : wc.precoders.V)
        power = std::max(power, v.squaredNorm() - cfg.P_m);
    record("power budget", power <= 1e-9, power);
    return out;
}

} // namespace geeprec
