#include "mdp_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace phl {

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ParseError(line, 1, msg);
}

double parse_prob(const std::string& s, int line) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) fail(line, "malformed probability '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        fail(line, "malformed probability '" + s + "'");
    }
}

// "name:prob" pair
std::pair<std::string, double> parse_weighted(const std::string& w, int line) {
    auto pos = w.rfind(':');
    if (pos == std::string::npos) fail(line, "expected name:probability, found '" + w + "'");
    return {w.substr(0, pos), parse_prob(w.substr(pos + 1), line)};
}

} // namespace

Mdp parse_mdp_text(const std::string& text) {
    Mdp m;
    std::map<std::string, int> state_ids, action_ids, prop_ids;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    bool saw_header = false, saw_states = false, saw_actions = false, saw_init = false;
    std::map<std::pair<int, int>, int> seen_rows;  // (state,action) -> line

    auto state_id = [&](const std::string& name, int line) {
        auto it = state_ids.find(name);
        if (it == state_ids.end()) fail(line, "unknown state '" + name + "'");
        return it->second;
    };

    while (std::getline(in, raw)) {
        ++lineno;
        auto words = split_ws(raw);
        if (words.empty()) continue;
        if (!saw_header) {
            if (words.size() != 1 || words[0] != "mdp") fail(lineno, "expected header line 'mdp'");
            saw_header = true;
            continue;
        }
        if (words[0] == "states:") {
            if (saw_states) fail(lineno, "duplicate states line");
            saw_states = true;
            for (size_t i = 1; i < words.size(); ++i) {
                if (state_ids.count(words[i])) fail(lineno, "duplicate state '" + words[i] + "'");
                state_ids[words[i]] = static_cast<int>(m.state_names.size());
                m.state_names.push_back(words[i]);
            }
            if (m.state_names.empty()) fail(lineno, "empty state list");
            m.labels.assign(m.state_names.size(), {});
            m.trans.assign(m.state_names.size(), {});
            continue;
        }
        if (words[0] == "actions:") {
            if (saw_actions) fail(lineno, "duplicate actions line");
            saw_actions = true;
            for (size_t i = 1; i < words.size(); ++i) {
                if (action_ids.count(words[i])) fail(lineno, "duplicate action '" + words[i] + "'");
                action_ids[words[i]] = static_cast<int>(m.action_names.size());
                m.action_names.push_back(words[i]);
            }
            if (m.action_names.empty()) fail(lineno, "empty action list");
            continue;
        }
        if (!saw_states || !saw_actions)
            fail(lineno, "states and actions must be declared before '" + words[0] + "'");
        if (words[0] == "init:") {
            if (saw_init) fail(lineno, "duplicate init line");
            saw_init = true;
            for (size_t i = 1; i < words.size(); ++i) {
                auto [name, p] = parse_weighted(words[i], lineno);
                m.init.push_back({state_id(name, lineno), p});
            }
            std::sort(m.init.begin(), m.init.end());
            continue;
        }
        if (words[0] == "label") {
            if (words.size() < 2 || words[1].empty() || words[1].back() != ':')
                fail(lineno, "expected 'label <state>:'");
            int s = state_id(words[1].substr(0, words[1].size() - 1), lineno);
            for (size_t i = 2; i < words.size(); ++i) {
                auto it = prop_ids.find(words[i]);
                int p;
                if (it == prop_ids.end()) {
                    p = static_cast<int>(m.props.size());
                    prop_ids[words[i]] = p;
                    m.props.push_back({words[i], 0});
                } else {
                    p = it->second;
                }
                m.labels[s].push_back(p);
            }
            std::sort(m.labels[s].begin(), m.labels[s].end());
            m.labels[s].erase(std::unique(m.labels[s].begin(), m.labels[s].end()),
                              m.labels[s].end());
            continue;
        }
        if (words[0] == "trans") {
            if (words.size() < 3 || words[2].empty() || words[2].back() != ':')
                fail(lineno, "expected 'trans <state> <action>: <state>:<p> ...'");
            int s = state_id(words[1], lineno);
            std::string aname = words[2].substr(0, words[2].size() - 1);
            auto it = action_ids.find(aname);
            if (it == action_ids.end()) fail(lineno, "unknown action '" + aname + "'");
            int a = it->second;
            if (seen_rows.count({s, a}))
                fail(lineno, "duplicate transition row for (" + words[1] + "," + aname + ")");
            seen_rows[{s, a}] = lineno;
            Distribution d;
            for (size_t i = 3; i < words.size(); ++i) {
                auto [name, p] = parse_weighted(words[i], lineno);
                d.push_back({state_id(name, lineno), p});
            }
            std::sort(d.begin(), d.end());
            m.trans[s].push_back({a, std::move(d)});
            continue;
        }
        fail(lineno, "unrecognized line '" + words[0] + "'");
    }
    if (!saw_header) fail(lineno, "missing 'mdp' header");
    if (!saw_states) fail(lineno, "missing states line");
    if (!saw_init) fail(lineno, "missing init line");
    for (auto& rows : m.trans) std::sort(rows.begin(), rows.end());

    auto violations = validate_mdp(m);
    if (!violations.empty()) {
        std::string msg = "invalid MDP:";
        for (const auto& v : violations) msg += "\n  " + v;
        throw PhlError(msg);
    }
    return m;
}

Mdp parse_mdp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PhlError("cannot open MDP file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_mdp_text(buf.str());
}

std::string write_mdp_text(const Mdp& m) {
    std::string out = "mdp\nstates:";
    for (const auto& s : m.state_names) out += " " + s;
    out += "\nactions:";
    for (const auto& a : m.action_names) out += " " + a;
    out += "\ninit:";
    for (const auto& [s, p] : m.init) out += " " + m.state_names[s] + ":" + format_double(p);
    out += "\n";
    for (int s = 0; s < m.num_states(); ++s) {
        if (m.labels[s].empty()) continue;
        out += "label " + m.state_names[s] + ":";
        for (PropId p : m.labels[s]) out += " " + m.props[p].base;
        out += "\n";
    }
    for (int s = 0; s < m.num_states(); ++s) {
        for (const auto& [a, d] : m.trans[s]) {
            out += "trans " + m.state_names[s] + " " + m.action_names[a] + ":";
            for (const auto& [t, p] : d) out += " " + m.state_names[t] + ":" + format_double(p);
            out += "\n";
        }
    }
    return out;
}

void write_mdp_file(const Mdp& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PhlError("cannot open '" + path + "' for writing");
    out << write_mdp_text(m);
}

} // namespace phl
