// Text formats for datasets, policies and CSV output.
//
// Dataset: one header line
//   # srmrl-dataset domain=<name> d_S=<n> d_A=<n> T=<n> N=<n> A=<x> B=<x>
// then one transition per line:
//   episode_id,step,s[0..d_S-1],a[0..d_A-1],s_next[0..d_S-1],reward
//
// Policy: one header line
//   # srmrl-policy representation=<rbf|invdist> M=<n> action_dim=<n> width=<x> epsilon=<x> k=<n> limit=<x>
// then M rows of phi, comma separated.
//
// Numbers in data files are written with 17 significant digits so they
// round-trip exactly.
#pragma once

#include "error.hpp"
#include "mdp.hpp"
#include "policy.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace srm {

inline std::string format_number(double v, int digits = 17) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("cannot parse " + what + " from '" + s + "'");
    }
}

inline std::size_t parse_size(const std::string& s, const std::string& what) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ValidationError("cannot parse " + what + " from '" + s + "'");
    return v;
}

// "# tag k=v k=v ..." -> map; throws unless the tag matches.
inline std::map<std::string, std::string> parse_header(const std::string& line, const std::string& tag) {
    std::istringstream in(line);
    std::string hash, got;
    in >> hash >> got;
    if (hash != "#" || got != tag) throw ValidationError("expected a '# " + tag + "' header line");
    std::map<std::string, std::string> kv;
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ValidationError("malformed header field '" + tok + "'");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

inline const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError("header is missing '" + key + "'");
    return it->second;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

} // namespace detail

struct DatasetFile {
    std::string domain;
    ReturnRange range;
    TransitionDataset data;
};

inline void write_dataset(std::ostream& out, const TransitionDataset& data, const std::string& domain,
                          const ReturnRange& range) {
    out << "# srmrl-dataset domain=" << domain << " d_S=" << data.state_dim() << " d_A=" << data.action_dim()
        << " T=" << data.horizon() << " N=" << data.episode_count() << " A=" << format_number(range.lower)
        << " B=" << format_number(range.upper) << "\n";
    for (const auto& t : data) {
        out << t.source_episode << ',' << t.source_step;
        for (double v : t.s) out << ',' << format_number(v);
        for (double v : t.a) out << ',' << format_number(v);
        for (double v : t.s_next) out << ',' << format_number(v);
        out << ',' << format_number(t.reward) << "\n";
    }
}

inline void write_dataset(const std::string& path, const TransitionDataset& data, const std::string& domain,
                          const ReturnRange& range) {
    auto out = detail::open_out(path);
    write_dataset(out, data, domain, range);
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline DatasetFile read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("dataset file is empty");
    const auto kv = detail::parse_header(line, "srmrl-dataset");
    DatasetFile f;
    f.domain = kv.count("domain") ? kv.at("domain") : "";
    const std::size_t ds = detail::parse_size(detail::require(kv, "d_S"), "d_S");
    const std::size_t da = detail::parse_size(detail::require(kv, "d_A"), "d_A");
    const std::size_t T = detail::parse_size(detail::require(kv, "T"), "T");
    const std::size_t N = detail::parse_size(detail::require(kv, "N"), "N");
    f.range = {detail::parse_double(detail::require(kv, "A"), "A"), detail::parse_double(detail::require(kv, "B"), "B")};
    std::vector<Transition> ts;
    ts.reserve(N * T);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != 3 + 2 * ds + da)
            throw ValidationError("dataset line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                  " fields, expected " + std::to_string(3 + 2 * ds + da));
        Transition t;
        t.source_episode = detail::parse_size(cells[0], "episode_id");
        t.source_step = detail::parse_size(cells[1], "step");
        std::size_t c = 2;
        for (std::size_t i = 0; i < ds; ++i) t.s.push_back(detail::parse_double(cells[c++], "state"));
        for (std::size_t i = 0; i < da; ++i) t.a.push_back(detail::parse_double(cells[c++], "action"));
        for (std::size_t i = 0; i < ds; ++i) t.s_next.push_back(detail::parse_double(cells[c++], "next state"));
        t.reward = detail::parse_double(cells[c], "reward");
        ts.push_back(std::move(t));
    }
    try {
        f.data = TransitionDataset(std::move(ts), N, T);
    } catch (const StructuralError& e) {
        throw ValidationError(std::string("dataset file: ") + e.what());
    }
    return f;
}

inline DatasetFile read_dataset(const std::string& path) {
    auto in = detail::open_in(path);
    return read_dataset(in);
}

// ---- policies ---------------------------------------------------------------

struct PolicyFile {
    Representation representation = Representation::rbf;
    std::size_t class_index = 1;
    double limit = 0.0;
    double width = 0.0;
    double epsilon = 0.0;
    PolicyParams params;
};

inline void write_policy(std::ostream& out, const PolicyParams& p, const PolicyClass& cls) {
    double width = 0.0, eps = 0.0;
    if (const auto* r = std::get_if<RbfPolicyClass>(&cls)) width = r->width;
    if (const auto* d = std::get_if<InvDistPolicyClass>(&cls)) eps = d->epsilon;
    out << "# srmrl-policy representation=" << to_string(representation(cls)) << " M=" << p.rows
        << " action_dim=" << p.cols << " width=" << format_number(width) << " epsilon=" << format_number(eps)
        << " k=" << geometry(cls).index << " limit=" << format_number(magnitude_limit(cls)) << "\n";
    for (std::size_t i = 0; i < p.rows; ++i) {
        for (std::size_t j = 0; j < p.cols; ++j) out << (j ? "," : "") << format_number(p(i, j));
        out << "\n";
    }
}

inline void write_policy(const std::string& path, const PolicyParams& p, const PolicyClass& cls) {
    auto out = detail::open_out(path);
    write_policy(out, p, cls);
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline PolicyFile read_policy(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("policy file is empty");
    const auto kv = detail::parse_header(line, "srmrl-policy");
    PolicyFile f;
    const std::string& rep = detail::require(kv, "representation");
    if (rep == "rbf") f.representation = Representation::rbf;
    else if (rep == "invdist") f.representation = Representation::invdist;
    else throw ValidationError("unknown policy representation '" + rep + "'");
    const std::size_t M = detail::parse_size(detail::require(kv, "M"), "M");
    const std::size_t A = detail::parse_size(detail::require(kv, "action_dim"), "action_dim");
    f.class_index = detail::parse_size(detail::require(kv, "k"), "k");
    f.limit = detail::parse_double(detail::require(kv, "limit"), "limit");
    f.width = detail::parse_double(detail::require(kv, "width"), "width");
    f.epsilon = detail::parse_double(detail::require(kv, "epsilon"), "epsilon");
    f.params = PolicyParams(M, A);
    for (std::size_t i = 0; i < M; ++i) {
        if (!std::getline(in, line)) throw ValidationError("policy file has fewer than M rows");
        const auto cells = detail::split(line, ',');
        if (cells.size() != A) throw ValidationError("policy row " + std::to_string(i) + " has wrong width");
        for (std::size_t j = 0; j < A; ++j) f.params(i, j) = detail::parse_double(cells[j], "phi");
    }
    return f;
}

inline PolicyFile read_policy(const std::string& path) {
    auto in = detail::open_in(path);
    return read_policy(in);
}

// ---- CSV ----------------------------------------------------------------------

// Fixed-precision CSV cell: 12 significant digits.
inline std::string csv_number(double v) { return format_number(v, 12); }

} // namespace srm
