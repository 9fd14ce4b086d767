// SPDX-License-Identifier: Apache-2.0
//
// alignsim - Monte Carlo simulator for interference alignment with analog CSI feedback
// Copyright (C) 2026 the alignsim authors
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
//
// Network description for the K-user MIMO interference channel: K
// source/sink pairs, Nt transmit and Nr receive antennas per node, d_i data
// streams for pair i. Forward transmit power P, reverse/feedback power Pf,
// noise variance sigma2 at every node. Config files carry powers in dB
// (P = 10^(P_dB/10)); with the default sigma2 = 1 the dB value is the SNR.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace alignsim {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NetworkConfig {
    int K = 0;
    int Nt = 0;
    int Nr = 0;
    std::vector<int> d;  // streams per user, d.size() == K
    double P = 1.0;      // forward transmit power (linear)
    double Pf = 1.0;     // reverse / feedback transmit power (linear)
    double sigma2 = 1.0; // noise variance

    double alpha() const { return P / Pf; }
    int sum_d() const {
        int s = 0;
        for (int x : d) s += x;
        return s;
    }
    bool equal_streams() const {
        return std::all_of(d.begin(), d.end(), [&](int x) { return x == d.front(); });
    }
};

enum class Properness { proper, improper, unknown };

struct ValidatedConfig {
    NetworkConfig config;
    Properness properness = Properness::unknown;
    std::string warning;  // non-empty when properness could not be decided
};

// Checks dimension constraints and decides stream feasibility. For equal
// stream counts the symmetric condition Nt + Nr - (K+1)*d >= 0 must hold;
// configurations that violate it are rejected. Unequal stream splits get a
// warning instead (the solver's convergence failure is the authoritative
// signal there).
inline ValidatedConfig validate_config(const NetworkConfig& cfg) {
    if (cfg.K < 1) throw ConfigError("K >= 1 violated: K=" + std::to_string(cfg.K));
    if (cfg.Nt < 1 || cfg.Nr < 1)
        throw ConfigError("Nt, Nr >= 1 violated: Nt=" + std::to_string(cfg.Nt) +
                          ", Nr=" + std::to_string(cfg.Nr));
    if (static_cast<int>(cfg.d.size()) != cfg.K)
        throw ConfigError("d must list one stream count per user: got " +
                          std::to_string(cfg.d.size()) + " entries for K=" + std::to_string(cfg.K));
    const int dmax = std::min(cfg.Nt, cfg.Nr);
    for (int i = 0; i < cfg.K; ++i) {
        if (cfg.d[i] < 1 || cfg.d[i] > dmax)
            throw ConfigError("1 <= d_i <= min(Nt, Nr) violated: d[" + std::to_string(i) +
                              "]=" + std::to_string(cfg.d[i]) + ", min(Nt, Nr)=" + std::to_string(dmax));
    }
    if (cfg.K * cfg.Nt < cfg.Nr)
        throw ConfigError("K*Nt >= Nr violated (feedback recovery needs it): K*Nt=" +
                          std::to_string(cfg.K * cfg.Nt) + ", Nr=" + std::to_string(cfg.Nr));
    if (!(cfg.P >= 0.0) || !(cfg.Pf >= 0.0))
        throw ConfigError("P, Pf >= 0 violated");
    if (!(cfg.sigma2 > 0.0)) throw ConfigError("sigma2 > 0 violated");

    ValidatedConfig out{cfg, Properness::unknown, ""};
    if (cfg.equal_streams()) {
        const int margin = cfg.Nt + cfg.Nr - (cfg.K + 1) * cfg.d.front();
        if (margin < 0)
            throw ConfigError("improper configuration: Nt + Nr - (K+1)*d = " +
                              std::to_string(margin) + " < 0, alignment infeasible");
        out.properness = Properness::proper;
    } else {
        out.warning = "unequal stream counts: feasibility not decided by the symmetric "
                      "properness test; rely on solver convergence";
    }
    return out;
}

// Minimal flat "key = value" file. '#' starts a comment, values may be
// comma-separated lists. Keys are case-sensitive and single-valued.
class KeyValueFile {
  public:
    static KeyValueFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        return parse_stream(in, path);
    }

    static KeyValueFile parse_stream(std::istream& in, const std::string& name = "<stream>") {
        KeyValueFile kv;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError(name + ":" + std::to_string(lineno) + ": expected 'key = value'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
            if (kv.values_.count(key))
                throw ConfigError(name + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
            kv.values_[key] = value;
        }
        return kv;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing config key: " + key);
        return it->second;
    }

    std::string get_string_or(const std::string& key, const std::string& dflt) const {
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
    double get_double_or(const std::string& key, double dflt) const {
        return has(key) ? get_double(key) : dflt;
    }

    long long get_int(const std::string& key) const { return to_int(key, get_string(key)); }
    long long get_int_or(const std::string& key, long long dflt) const {
        return has(key) ? get_int(key) : dflt;
    }

    std::vector<double> get_double_list(const std::string& key) const {
        std::vector<double> out;
        for (const auto& tok : split_list(get_string(key))) out.push_back(to_double(key, tok));
        return out;
    }

    std::vector<int> get_int_list(const std::string& key) const {
        std::vector<int> out;
        for (const auto& tok : split_list(get_string(key)))
            out.push_back(static_cast<int>(to_int(key, tok)));
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }
    static std::vector<std::string> split_list(const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) out.push_back(tok);
        }
        return out;
    }
    static double to_double(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': cannot parse '" + s + "' as a number");
        }
    }
    static long long to_int(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': cannot parse '" + s + "' as an integer");
        }
    }

    std::map<std::string, std::string> values_;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// Network keys: K, Nt, Nr, d (list), P_dB, Pf_dB, sigma2 (optional, default 1).
inline NetworkConfig parse_network_config(const KeyValueFile& kv) {
    NetworkConfig cfg;
    cfg.K = static_cast<int>(kv.get_int("K"));
    cfg.Nt = static_cast<int>(kv.get_int("Nt"));
    cfg.Nr = static_cast<int>(kv.get_int("Nr"));
    cfg.d = kv.get_int_list("d");
    cfg.sigma2 = kv.get_double_or("sigma2", 1.0);
    cfg.P = cfg.sigma2 * db_to_linear(kv.get_double_or("P_dB", 0.0));
    cfg.Pf = cfg.sigma2 * db_to_linear(kv.get_double_or("Pf_dB", 0.0));
    validate_config(cfg);
    return cfg;
}

}  // namespace alignsim
