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

#include "geeprec/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace geeprec {

namespace {

// Reads a field that may be given in watts or, with a _dbw suffix, in dBW.
void read_power(const json& j, const char* key, double& out)
{
    const std::string dbw = std::string(key) + "_dbw";
    if (j.contains(key) && j.contains(dbw))
        throw ConfigError(std::string("both ") + key + " and " + dbw + " given");
    if (j.contains(key))
        out = j.at(key).get<double>();
    else if (j.contains(dbw))
        out = std::pow(10.0, j.at(dbw).get<double>() / 10.0);
}

json vector_to_json(const VecR& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

VecR vector_from_json(const json& j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const VecR>(v.data(), static_cast<Index>(v.size()));
}

json affine_to_json(const sdp::AffineHermitian& a)
{
    json terms = json::array();
    for (const auto& [k, c] : a.terms)
        terms.push_back({{"var", k}, {"coefficient", matrix_to_json(c)}});
    return {{"side", a.side()}, {"constant", matrix_to_json(a.constant)}, {"terms", terms}};
}

sdp::AffineHermitian affine_from_json(const json& j)
{
    sdp::AffineHermitian a;
    a.constant = matrix_from_json(j.at("constant"));
    const Index side = j.value("side", a.constant.rows());
    if (a.constant.size() == 0)
        a.constant = MatC::Zero(side, side);
    for (const auto& t : j.at("terms"))
        a.terms.emplace_back(t.at("var").get<Index>(), matrix_from_json(t.at("coefficient")));
    return a;
}

} // namespace

json matrix_to_json(const MatC& m)
{
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

MatC matrix_from_json(const json& j)
{
    if (!j.is_array())
        throw ConfigError("matrix must be an array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
    MatC m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        if (static_cast<Index>(j[r].size()) != cols)
            throw DimensionError("ragged matrix rows");
        for (Index c = 0; c < cols; ++c) {
            const json& z = j[r][c];
            if (z.is_number())
                m(r, c) = cd(z.get<double>(), 0.0);
            else if (z.is_array() && z.size() == 2)
                m(r, c) = cd(z[0].get<double>(), z[1].get<double>());
            else
                throw ConfigError("complex entries must be [re, im] pairs");
        }
    }
    return m;
}

void to_json(json& j, const SystemConfig& cfg)
{
    j = {{"K", cfg.K},         {"M", cfg.M},     {"N", cfg.N},         {"d", cfg.d},
         {"sigma2", cfg.sigma2}, {"P_m", cfg.P_m}, {"P_cir", cfg.P_cir}, {"rho", cfg.rho},
         {"sigma_h2", cfg.sigma_h2}};
    if (!cfg.alpha.empty())
        j["alpha"] = cfg.alpha;
}

void from_json(const json& j, SystemConfig& cfg)
{
    static const char* known[] = {"K",     "M",         "N",   "d",     "sigma2",   "P_m",   "P_m_dbw",
                                  "P_cir", "P_cir_dbw", "rho", "alpha", "sigma_h2", "sigma2_dbw"};
    for (const auto& item : j.items())
        if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known))
            throw ConfigError("unknown system field: " + item.key());
    cfg.K = j.value("K", cfg.K);
    cfg.M = j.value("M", cfg.M);
    cfg.N = j.value("N", cfg.N);
    cfg.d = j.value("d", cfg.d);
    read_power(j, "sigma2", cfg.sigma2);
    read_power(j, "P_m", cfg.P_m);
    read_power(j, "P_cir", cfg.P_cir);
    cfg.rho = j.value("rho", cfg.rho);
    cfg.sigma_h2 = j.value("sigma_h2", cfg.sigma_h2);
    if (j.contains("alpha"))
        cfg.alpha = j.at("alpha").get<std::vector<double>>();
}

void to_json(json& j, const ChannelSet& channels)
{
    const int K = channels.K();
    json H = json::array();
    for (int i = 0; i < K; ++i) {
        json row = json::array();
        for (int jj = 0; jj < K; ++jj)
            row.push_back(matrix_to_json(channels(i, jj)));
        H.push_back(std::move(row));
    }
    j = {{"K", K}, {"H", H}};
}

void from_json(const json& j, ChannelSet& channels)
{
    const json& H = j.at("H");
    const int K = static_cast<int>(H.size());
    if (j.contains("K") && j.at("K").get<int>() != K)
        throw DimensionError("K does not match the number of rows of H");
    channels = ChannelSet{PairGrid<MatC>(K)};
    for (int i = 0; i < K; ++i) {
        if (static_cast<int>(H[i].size()) != K)
            throw DimensionError("H must be K x K");
        for (int jj = 0; jj < K; ++jj)
            channels.H(i, jj) = matrix_from_json(H[i][jj]);
    }
    for (const auto& m : channels.H)
        if (m.rows() != channels.H(0, 0).rows() || m.cols() != channels.H(0, 0).cols())
            throw DimensionError("all links must share one shape");
}

void to_json(json& j, const GeeReport& report)
{
    json trace = json::array();
    for (const auto& [eta, obj] : report.trace)
        trace.push_back({eta, obj});
    j = {{"rates", report.rates},       {"total_power", report.total_power}, {"gee", report.gee},
         {"trace", trace},              {"iterations", report.iterations},   {"converged", report.converged},
         {"warning", report.warning}};
}

void from_json(const json& j, GeeReport& report)
{
    report.rates = j.at("rates").get<std::vector<double>>();
    report.total_power = j.at("total_power").get<double>();
    report.gee = j.at("gee").get<double>();
    report.trace.clear();
    for (const auto& p : j.value("trace", json::array()))
        report.trace.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    report.iterations = j.value("iterations", 0);
    report.converged = j.value("converged", true);
    report.warning = j.value("warning", std::string());
}

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

namespace sdp {

namespace {

const char* kind_name(VariableKind k)
{
    switch (k) {
    case VariableKind::Real: return "real";
    case VariableKind::Complex: return "complex";
    case VariableKind::Hermitian: return "hermitian";
    }
    return "real";
}

} // namespace

void to_json(json& j, const SdpProblem& problem)
{
    json vars = json::array();
    for (const auto& v : problem.variables)
        vars.push_back({{"name", v.name}, {"kind", kind_name(v.kind)}, {"rows", v.rows}, {"cols", v.cols}});
    json logdet = json::array();
    for (const auto& t : problem.logdet)
        logdet.push_back({{"weight", t.weight}, {"map", affine_to_json(t.map)}});
    json cons = json::array();
    for (const auto& c : problem.constraints)
        cons.push_back(affine_to_json(c));
    j = {{"sense", problem.sense == Sense::Minimize ? "minimize" : "maximize"},
         {"variables", vars},
         {"objective", vector_to_json(problem.objective)},
         {"logdet", logdet},
         {"constraints", cons}};
}

void from_json(const json& j, SdpProblem& problem)
{
    problem = SdpProblem{};
    const std::string sense = j.value("sense", std::string("minimize"));
    if (sense != "minimize" && sense != "maximize")
        throw ConfigError("sense must be minimize or maximize");
    problem.sense = sense == "minimize" ? Sense::Minimize : Sense::Maximize;
    for (const auto& v : j.at("variables")) {
        const std::string kind = v.value("kind", std::string("real"));
        const std::string name = v.at("name").get<std::string>();
        if (kind == "real")
            problem.add_real(name);
        else if (kind == "complex")
            problem.add_complex(name, v.at("rows").get<Index>(), v.at("cols").get<Index>());
        else if (kind == "hermitian")
            problem.add_hermitian(name, v.at("rows").get<Index>());
        else
            throw ConfigError("unknown variable kind: " + kind);
    }
    const VecR c = vector_from_json(j.at("objective"));
    if (c.size() != problem.num_scalars())
        throw DimensionError("objective length does not match the variables");
    problem.objective = c;
    for (const auto& t : j.value("logdet", json::array()))
        problem.logdet.push_back({t.at("weight").get<double>(), affine_from_json(t.at("map"))});
    for (const auto& cj : j.at("constraints"))
        problem.constraints.push_back(affine_from_json(cj));
    problem.validate();
}

void to_json(json& j, const SdpSolution& solution)
{
    j = {{"assignment", vector_to_json(solution.assignment)},
         {"objective_value", solution.objective_value},
         {"status", to_string(solution.status)},
         {"kkt", {{"primal", solution.kkt.primal}, {"dual", solution.kkt.dual}, {"gap", solution.kkt.gap}}},
         {"iterations", solution.iterations},
         {"min_eigenvalue", solution.min_eigenvalue}};
}

void from_json(const json& j, SdpSolution& solution)
{
    solution.assignment = vector_from_json(j.at("assignment"));
    solution.objective_value = j.at("objective_value").get<double>();
    const std::string s = j.at("status").get<std::string>();
    bool found = false;
    for (SdpStatus st : {SdpStatus::Optimal, SdpStatus::MaxIterations, SdpStatus::Infeasible, SdpStatus::Unbounded})
        if (to_string(st) == s) {
            solution.status = st;
            found = true;
        }
    if (!found)
        throw ConfigError("unknown status: " + s);
    const json& k = j.at("kkt");
    solution.kkt = {k.at("primal").get<double>(), k.at("dual").get<double>(), k.at("gap").get<double>()};
    solution.iterations = j.value("iterations", 0);
    solution.min_eigenvalue = j.value("min_eigenvalue", 0.0);
}

} // namespace sdp

} // namespace geeprec
