/*
 * Copyright 2026 The mislmm Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mislmm/study_config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "mislmm/error.hpp"
#include "mislmm/rng.hpp"

namespace mislmm
{

namespace
{

const std::set<std::string>& known_keys()
{
    static const std::set<std::string> keys{
        "n", "p", "np", "m", "omega", "a", "b", "ab", "mu", "reps", "levels",
        "random_causal", "fixed_genotypes", "exponent_mode", "gamma_mode"};
    return keys;
}

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

class Entries
{
public:
    Entries(std::map<std::string, std::string> values, std::string source)
        : values_(std::move(values)), source_(std::move(source))
    {
    }

    [[nodiscard]] bool has(const std::string& key) const { return values_.contains(key); }

    [[nodiscard]] std::vector<std::string> list(const std::string& key) const
    {
        std::vector<std::string> out;
        std::istringstream in(values_.at(key));
        std::string item;
        while (std::getline(in, item, ','))
        {
            item = trim(item);
            if (item.empty()) fail(key, "empty list item");
            out.push_back(item);
        }
        if (out.empty()) fail(key, "no value");
        if (values_.at(key).back() == ',') fail(key, "empty list item");
        return out;
    }

    [[nodiscard]] std::string scalar(const std::string& key) const
    {
        auto items = list(key);
        if (items.size() != 1) fail(key, "expects a single value");
        return items.front();
    }

    [[nodiscard]] double number(const std::string& key, const std::string& text) const
    {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v))
        {
            fail(key, "not a number: '" + text + "'");
        }
        return v;
    }

    [[nodiscard]] Index count(const std::string& key, const std::string& text) const
    {
        errno = 0;
        char* end = nullptr;
        const long long v = std::strtoll(text.c_str(), &end, 10);
        if (end != text.c_str() + text.size() || errno == ERANGE || v < 0)
        {
            fail(key, "not a nonnegative integer: '" + text + "'");
        }
        return static_cast<Index>(v);
    }

    [[nodiscard]] std::vector<double> numbers(const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& item : list(key)) out.push_back(number(key, item));
        return out;
    }

    [[nodiscard]] std::vector<Index> counts(const std::string& key) const
    {
        std::vector<Index> out;
        for (const auto& item : list(key)) out.push_back(count(key, item));
        return out;
    }

    [[nodiscard]] std::vector<std::pair<std::string, std::string>> pairs(const std::string& key,
                                                                       char sep) const
    {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& item : list(key))
        {
            const auto pos = item.find(sep);
            if (pos == std::string::npos || item.find(sep, pos + 1) != std::string::npos)
            {
                fail(key, "expected two values separated by '" + std::string(1, sep) + "': '"
                              + item + "'");
            }
            out.emplace_back(trim(item.substr(0, pos)), trim(item.substr(pos + 1)));
        }
        return out;
    }

    [[nodiscard]] bool flag(const std::string& key) const
    {
        const auto v = scalar(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail(key, "expected true or false, got '" + v + "'");
    }

    void exclusive(const std::string& one, const std::string& other) const
    {
        if (has(one) && has(other))
        {
            fail(one, "cannot be combined with '" + other + "'");
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& why) const
    {
        throw InputError(source_ + ": key '" + key + "': " + why);
    }

    [[noreturn]] void missing(const std::string& what) const
    {
        throw InputError(source_ + ": missing " + what);
    }

private:
    std::map<std::string, std::string> values_;
    std::string source_;
};

struct CausalSpec
{
    bool is_fraction = false;
    Index count = 0;
    double fraction = 0.0;
};

}  // namespace

StudyConfig parse_study_config(const std::string& text, std::uint64_t seed,
                               const std::string& source)
{
    std::map<std::string, std::string> values;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
        {
            throw InputError(source + ": line " + std::to_string(line_no)
                             + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (!known_keys().contains(key))
        {
            throw InputError(source + ": line " + std::to_string(line_no) + ": unknown key '"
                             + key + "'");
        }
        if (!values.emplace(key, trim(line.substr(eq + 1))).second)
        {
            throw InputError(source + ": line " + std::to_string(line_no) + ": duplicate key '"
                             + key + "'");
        }
    }
    const Entries e(std::move(values), source);

    std::vector<std::pair<Index, Index>> sizes;
    e.exclusive("np", "n");
    e.exclusive("np", "p");
    if (e.has("np"))
    {
        for (const auto& [n, p] : e.pairs("np", 'x')) sizes.emplace_back(e.count("np", n), e.count("np", p));
    }
    else
    {
        if (!e.has("n") || !e.has("p")) e.missing("sizes: give 'n' and 'p', or 'np'");
        for (Index n : e.counts("n"))
        {
            for (Index p : e.counts("p")) sizes.emplace_back(n, p);
        }
    }

    std::vector<CausalSpec> causal;
    e.exclusive("omega", "m");
    if (e.has("omega"))
    {
        for (double w : e.numbers("omega"))
        {
            if (!(w > 0.0 && w <= 1.0)) e.fail("omega", "must lie in (0, 1]");
            causal.push_back({true, 0, w});
        }
    }
    else
    {
        if (!e.has("m")) e.missing("causal count: give 'm' or 'omega'");
        for (Index m : e.counts("m")) causal.push_back({false, m, 0.0});
    }

    std::vector<std::pair<double, double>> ab;
    e.exclusive("ab", "a");
    e.exclusive("ab", "b");
    if (e.has("ab"))
    {
        for (const auto& [a, b] : e.pairs("ab", ':')) ab.emplace_back(e.number("ab", a), e.number("ab", b));
    }
    else
    {
        if (!e.has("a") || !e.has("b")) e.missing("variances: give 'a' and 'b', or 'ab'");
        for (double a : e.numbers("a"))
        {
            for (double b : e.numbers("b")) ab.emplace_back(a, b);
        }
    }

    const std::vector<double> mus = e.has("mu") ? e.numbers("mu") : std::vector<double>{0.0};

    SimConfig base;
    if (e.has("reps"))
    {
        const Index reps = e.count("reps", e.scalar("reps"));
        if (reps < 1) e.fail("reps", "must be at least 1");
        base.n_reps = static_cast<int>(reps);
    }
    if (e.has("levels"))
    {
        base.levels = e.numbers("levels");
        for (double l : base.levels)
        {
            if (!(l > 0.0 && l < 1.0)) e.fail("levels", "each level must lie in (0, 1)");
        }
    }
    if (e.has("random_causal")) base.random_causal = e.flag("random_causal");
    if (e.has("fixed_genotypes")) base.fixed_genotypes = e.flag("fixed_genotypes");

    StudyConfig out;
    for (const std::string key : {"exponent_mode", "gamma_mode"})
    {
        if (!e.has(key)) continue;
        const std::string value = e.scalar(key);
        try
        {
            if (key == "exponent_mode") out.variance.exponent = parse_exponent_mode(value);
            else out.variance.gamma = parse_gamma_mode(value);
        }
        catch (const InputError& err)
        {
            e.fail(key, err.what());
        }
    }

    for (const auto& [n, p] : sizes)
    {
        for (const auto& c : causal)
        {
            for (const auto& [a, b] : ab)
            {
                for (double mu : mus)
                {
                    SimConfig cfg = base;
                    cfg.n = n;
                    cfg.p = p;
                    cfg.m = c.is_fraction
                                ? std::max<Index>(1, static_cast<Index>(std::llround(
                                                         c.fraction * static_cast<double>(p))))
                                : c.count;
                    cfg.a = a;
                    cfg.b = b;
                    cfg.mu = mu;
                    cfg.seed = derive_seed(seed, out.scenarios.size());
                    try
                    {
                        cfg.validate();
                    }
                    catch (const InputError& err)
                    {
                        throw InputError(source + ": scenario " + std::to_string(out.scenarios.size())
                                         + ": " + err.what());
                    }
                    out.scenarios.push_back(std::move(cfg));
                }
            }
        }
    }
    return out;
}

StudyConfig load_study_config(const std::filesystem::path& path, std::uint64_t seed)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_study_config(buf.str(), seed, path.string());
}

}  // namespace mislmm
