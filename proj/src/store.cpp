#include "vnnarena/store.hpp"

#include <fstream>
#include <sstream>

#include "vnnarena/errors.hpp"
#include "vnnarena/textutil.hpp"

namespace vnna::store {

std::string format_entry(const Entry& e) {
    const runner::VerdictRecord& r = e.record;
    std::ostringstream out;
    out << "tool=" << text::kv_escape(r.tool);
    out << " benchmark=" << text::kv_escape(r.benchmark);
    out << " instance=" << r.instance;
    out << " status=" << runner::run_status_name(r.status);
    out << " raw_runtime=" << text::format_double(r.raw_runtime);
    out << " adjusted_runtime=" << text::format_double(r.adjusted_runtime);
    out << " witness=" << (r.witness_path ? text::kv_escape(*r.witness_path) : "-");
    out << " witness_valid="
        << (e.witness_valid ? (*e.witness_valid ? "1" : "0") : "-");
    out << " started=" << text::format_double(e.started);
    out << " finished=" << text::format_double(e.finished);
    out << " diagnostics=" << text::kv_escape(r.diagnostics);
    return out.str();
}

Entry parse_entry(std::string_view line, int line_number) {
    Entry e;
    bool have_tool = false, have_bench = false, have_status = false;
    auto parse_index = [&](const std::string& value) {
        double v;
        if (!text::try_parse_double(value, v) || v != static_cast<int>(v) ||
            v < 0)
            throw SyntaxError("bad instance index '" + value + "'",
                              line_number, 1);
        return static_cast<int>(v);
    };
    for (const std::string& tok : text::split(line, ' ')) {
        if (tok.empty()) continue;
        auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw SyntaxError("store token without '='", line_number, 1);
        std::string key = tok.substr(0, eq);
        std::string value = text::kv_unescape(tok.substr(eq + 1));
        if (key == "tool") {
            e.record.tool = value;
            have_tool = true;
        } else if (key == "benchmark") {
            e.record.benchmark = value;
            have_bench = true;
        } else if (key == "instance") {
            e.record.instance = parse_index(value);
        } else if (key == "status") {
            auto s = runner::run_status_from(value);
            if (!s)
                throw SyntaxError("unknown status '" + value + "'",
                                  line_number, 1);
            e.record.status = *s;
            have_status = true;
        } else if (key == "raw_runtime") {
            double v;
            if (!text::try_parse_double(value, v))
                throw SyntaxError("bad raw_runtime", line_number, 1);
            e.record.raw_runtime = v;
        } else if (key == "adjusted_runtime") {
            double v;
            if (!text::try_parse_double(value, v))
                throw SyntaxError("bad adjusted_runtime", line_number, 1);
            e.record.adjusted_runtime = v;
        } else if (key == "witness") {
            if (value != "-") e.record.witness_path = value;
        } else if (key == "witness_valid") {
            if (value == "0") e.witness_valid = false;
            if (value == "1") e.witness_valid = true;
        } else if (key == "started") {
            text::try_parse_double(value, e.started);
        } else if (key == "finished") {
            text::try_parse_double(value, e.finished);
        } else if (key == "diagnostics") {
            e.record.diagnostics = value;
        } else {
            throw SyntaxError("unknown store field '" + key + "'",
                              line_number, 1);
        }
    }
    if (!have_tool || !have_bench || !have_status)
        throw SyntaxError("store record misses a required field", line_number,
                          1);
    return e;
}

std::vector<Entry> load(const std::filesystem::path& path) {
    std::vector<Entry> out;
    std::ifstream in(path);
    if (!in) throw MissingFile(path.string());
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::string trimmed = text::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        out.push_back(parse_entry(trimmed, line_number));
    }
    return out;
}

void append(const std::filesystem::path& path, const Entry& e) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot open store for append: " + path.string());
    out << format_entry(e) << "\n";
    out.flush();
    if (!out) throw IoError("store append failed: " + path.string());
}

}  // namespace vnna::store
