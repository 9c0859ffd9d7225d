#pragma once

#include "capacity.hpp"
#include "reductions.hpp"
#include "result.hpp"
#include "spectral.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <variant>

namespace opscale::io {

using json = nlohmann::json;

inline json number(double x)
{
    if (!std::isfinite(x))
        return nullptr;
    return x;
}

inline double to_double(const json& j)
{
    if (j.is_null())
        return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

inline json matrix_json(const Mat& A)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            r.push_back(A(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Mat matrix_from_json(const json& rows, Eigen::Index expect_rows = -1, Eigen::Index expect_cols = -1)
{
    if (!rows.is_array())
        throw std::invalid_argument("matrix must be an array of rows");
    const auto R = static_cast<Eigen::Index>(rows.size());
    const auto C = R ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    if ((expect_rows >= 0 && R != expect_rows) || (expect_cols >= 0 && C != expect_cols))
        throw std::invalid_argument("matrix shape does not match declared dimensions");
    Mat A(R, C);
    for (Eigen::Index i = 0; i < R; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != C)
            throw std::invalid_argument("ragged matrix rows");
        for (Eigen::Index j = 0; j < C; ++j)
            A(i, j) = rows[i][j].get<double>();
    }
    return A;
}

inline json to_json(const Operator& op)
{
    json mats = json::array();
    for (const auto& a : op.matrices())
        mats.push_back(matrix_json(a));
    return {{"type", "operator"}, {"m", op.m()}, {"n", op.n()}, {"k", op.k()}, {"matrices", mats}};
}

inline Operator operator_from_json(const json& j)
{
    const int m = j.at("m"), n = j.at("n"), k = j.at("k");
    const auto& mats = j.at("matrices");
    if (static_cast<int>(mats.size()) != k)
        throw std::invalid_argument("operator: k does not match matrix count");
    std::vector<Mat> v;
    for (const auto& a : mats)
        v.push_back(matrix_from_json(a, m, n));
    return Operator(std::move(v));
}

inline json to_json(const Frame& f)
{
    json vs = json::array();
    for (int i = 0; i < f.n(); ++i) {
        json v = json::array();
        for (int a = 0; a < f.d(); ++a)
            v.push_back(f.U(a, i));
        vs.push_back(std::move(v));
    }
    return {{"type", "frame"}, {"d", f.d()}, {"n", f.n()}, {"vectors", vs}};
}

inline Frame frame_from_json(const json& j)
{
    const int d = j.at("d"), n = j.at("n");
    const auto& vs = j.at("vectors");
    if (static_cast<int>(vs.size()) != n)
        throw std::invalid_argument("frame: n does not match vector count");
    Mat U(d, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(vs[i].size()) != d)
            throw std::invalid_argument("frame: vector length differs from d");
        for (int a = 0; a < d; ++a)
            U(a, i) = vs[i][a].get<double>();
    }
    return Frame(std::move(U));
}

inline json to_json(const BLDatum& dt)
{
    json maps = json::array(), ex = json::array();
    for (const auto& mp : dt.maps) {
        maps.push_back({{"nj", mp.nj}, {"B", matrix_json(mp.B)}});
        ex.push_back({{"c", mp.c}});
    }
    return {{"type", "bl_datum"}, {"n", dt.n}, {"maps", maps}, {"exponents", ex},
            {"denominator", dt.denominator}};
}

inline BLDatum bl_datum_from_json(const json& j)
{
    BLDatum dt;
    dt.n = j.at("n");
    dt.denominator = j.at("denominator");
    const auto& maps = j.at("maps");
    const auto& ex = j.at("exponents");
    if (maps.size() != ex.size())
        throw std::invalid_argument("BL datum: maps and exponents differ in length");
    for (std::size_t i = 0; i < maps.size(); ++i) {
        BLMap mp;
        mp.nj = maps[i].at("nj");
        mp.B = matrix_from_json(maps[i].at("B"), mp.nj, dt.n);
        mp.c = ex[i].at("c");
        dt.maps.push_back(std::move(mp));
    }
    dt.validate();
    return dt;
}

inline json matrix_instance_json(const Mat& B)
{
    return {{"type", "matrix"}, {"rows", B.rows()}, {"cols", B.cols()}, {"entries", matrix_json(B)}};
}

inline json to_json(const SpectralReport& r)
{
    return {{"type", "spectral_report"},
            {"sigma1", number(r.sigma1)},
            {"sigma2", number(r.sigma2)},
            {"s", number(r.s)},
            {"delta", number(r.delta)},
            {"lambda", number(r.lambda)},
            {"epsilon", number(r.epsilon)},
            {"gap_condition_holds", r.gap_condition_holds},
            {"C", number(r.C)},
            {"m", r.m},
            {"n", r.n}};
}

inline SpectralReport spectral_report_from_json(const json& j)
{
    SpectralReport r;
    r.sigma1 = to_double(j.at("sigma1"));
    r.sigma2 = to_double(j.at("sigma2"));
    r.s = to_double(j.at("s"));
    r.delta = to_double(j.at("delta"));
    r.lambda = to_double(j.at("lambda"));
    r.epsilon = to_double(j.at("epsilon"));
    r.gap_condition_holds = j.at("gap_condition_holds");
    r.C = to_double(j.at("C"));
    r.m = j.value("m", 0);
    r.n = j.value("n", 0);
    return r;
}

inline json to_json(const CapacityReport& c)
{
    json j = {{"type", "capacity_report"},
              {"log_lower", number(c.log_lower())},
              {"log_upper", number(c.log_upper())},
              {"log_exact", nullptr},
              {"method", c.method}};
    if (auto le = c.log_exact())
        j["log_exact"] = number(*le);
    return j;
}

inline CapacityReport capacity_report_from_json(const json& j)
{
    CapacityReport c;
    auto ex = [](const json& v) { return v.is_null() ? 0.0 : std::exp(v.get<double>()); };
    c.lower = ex(j.at("log_lower"));
    c.upper = ex(j.at("log_upper"));
    if (!j.at("log_exact").is_null())
        c.exact = std::exp(j.at("log_exact").get<double>());
    c.method = j.at("method");
    c.generic = c.method == "generic";
    return c;
}

inline json to_json(const ScalingResult& r, const std::string& trace_file)
{
    return {{"type", "scaling_result"},
            {"status", to_string(r.status)},
            {"converged", r.converged},
            {"message", r.message},
            {"iterations", r.iterations},
            {"alpha", number(r.alpha)},
            {"s_initial", number(r.s_initial)},
            {"s_final", number(r.s_final)},
            {"delta_final", number(r.delta_final)},
            {"epsilon_final", number(r.epsilon_final)},
            {"kappa_L", number(r.kappa_L)},
            {"kappa_R", number(r.kappa_R)},
            {"movement_sq", number(r.movement_sq)},
            {"L", matrix_json(r.L)},
            {"R", matrix_json(r.R)},
            {"trace_file", trace_file}};
}

inline Status status_from_string(const std::string& s)
{
    for (auto st : {Status::converged, Status::budget, Status::diverged, Status::singular})
        if (s == to_string(st))
            return st;
    throw std::invalid_argument("unknown status " + s);
}

inline ScalingResult scaling_result_from_json(const json& j)
{
    ScalingResult r;
    r.status = status_from_string(j.at("status"));
    r.converged = j.at("converged");
    r.message = j.at("message");
    r.iterations = j.at("iterations");
    r.alpha = to_double(j.at("alpha"));
    r.s_initial = to_double(j.at("s_initial"));
    r.s_final = to_double(j.at("s_final"));
    r.delta_final = to_double(j.at("delta_final"));
    r.epsilon_final = to_double(j.at("epsilon_final"));
    r.kappa_L = to_double(j.at("kappa_L"));
    r.kappa_R = to_double(j.at("kappa_R"));
    r.movement_sq = to_double(j.at("movement_sq"));
    r.L = matrix_from_json(j.at("L"));
    r.R = matrix_from_json(j.at("R"));
    return r;
}

inline std::string fmt17(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string trace_csv(const ConvergenceTrace& tr)
{
    std::ostringstream os;
    os << "iter,t,s,delta,E_op,F_op,kappa_L,kappa_R\n";
    for (const auto& r : tr)
        os << r.iter << ',' << fmt17(r.t) << ',' << fmt17(r.s) << ',' << fmt17(r.delta) << ','
           << fmt17(r.E_op) << ',' << fmt17(r.F_op) << ',' << fmt17(r.kappa_L) << ','
           << fmt17(r.kappa_R) << '\n';
    return os.str();
}

inline std::string matrix_csv(const Mat& B)
{
    std::ostringstream os;
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.cols(); ++j)
            os << (j ? "," : "") << fmt17(B(i, j));
        os << '\n';
    }
    return os.str();
}

inline Mat matrix_from_csv(const std::string& text)
{
    std::vector<std::vector<double>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#')
            continue;
        std::vector<double> r;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            std::size_t used = 0;
            const double v = std::stod(cell, &used);
            if (cell.find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument("bad CSV cell '" + cell + "'");
            r.push_back(v);
        }
        if (!rows.empty() && r.size() != rows[0].size())
            throw std::invalid_argument("ragged CSV matrix");
        rows.push_back(std::move(r));
    }
    if (rows.empty() || rows[0].empty())
        throw std::invalid_argument("empty CSV matrix");
    Mat B(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[0].size(); ++j)
            B(i, j) = rows[i][j];
    return B;
}

using Instance = std::variant<Operator, Frame, Mat, BLDatum>;

// JSON with a "type" field (or recognizable keys) first, dense CSV otherwise
inline Instance parse_instance(const std::string& text)
{
    json j = json::parse(text, nullptr, false);
    if (!j.is_discarded() && j.is_object()) {
        const std::string type = j.value("type", "");
        if (type == "operator" || (type.empty() && j.contains("matrices")))
            return operator_from_json(j);
        if (type == "frame" || (type.empty() && j.contains("vectors")))
            return frame_from_json(j);
        if (type == "bl_datum" || (type.empty() && j.contains("maps")))
            return bl_datum_from_json(j);
        if (type == "matrix" || (type.empty() && j.contains("entries")))
            return matrix_from_json(j.at("entries"), j.at("rows").get<Eigen::Index>(),
                                    j.at("cols").get<Eigen::Index>());
        throw std::invalid_argument("unrecognized instance type '" + type + "'");
    }
    return matrix_from_csv(text);
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline Instance load_instance(const std::filesystem::path& p) { return parse_instance(read_file(p)); }

// write to a sibling temp file, then rename over the target
inline void write_atomic(const std::filesystem::path& p, const std::string& content)
{
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    auto tmp = p;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, p);
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace opscale::io
