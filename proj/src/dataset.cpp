#include "fedbayes/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "fedbayes/errors.hpp"
#include "fedbayes/rng.hpp"

namespace fedbayes {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_quotes(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                          (s.front() == '"' && s.back() == '"')))
        return s.substr(1, s.size() - 2);
    return s;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

// Reads lines with universal newline handling; strips a trailing '\r'.
bool next_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

}  // namespace

void Dataset::validate() const {
    schema.validate();
    const std::size_t n = schema.n_features();
    if (x.size() != y.size() * n)
        throw SchemaError("dataset: x has " + std::to_string(x.size()) +
                          " cells, expected rows * features = " +
                          std::to_string(y.size() * n));
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= schema.n_classes())
            throw SchemaError("dataset: row " + std::to_string(i) +
                              " has class code " + std::to_string(y[i]) +
                              " outside [0, " +
                              std::to_string(schema.n_classes()) + ")");
        for (std::size_t j = 0; j < n; ++j) {
            const std::int32_t v = value(i, j);
            if (v < -1 || (v >= 0 && static_cast<std::size_t>(v) >=
                                         schema.cardinality(j)))
                throw SchemaError(
                    "dataset: row " + std::to_string(i) + ", feature '" +
                    schema.feature_names[j] + "' has code " +
                    std::to_string(v) + " outside [0, " +
                    std::to_string(schema.cardinality(j)) + ")");
        }
    }
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows_idx) const {
    Dataset out;
    out.schema = schema;
    const std::size_t n = schema.n_features();
    out.x.reserve(rows_idx.size() * n);
    out.y.reserve(rows_idx.size());
    for (std::size_t i : rows_idx) {
        for (std::size_t j = 0; j < n; ++j) out.x.push_back(value(i, j));
        out.y.push_back(y[i]);
    }
    return out;
}

Dataset Dataset::from_arrays(Schema schema, std::vector<std::int32_t> x,
                             std::vector<std::int32_t> y) {
    Dataset d;
    d.schema = std::move(schema);
    d.x = std::move(x);
    d.y = std::move(y);
    d.validate();
    return d;
}

Dataset load_csv(const std::string& path, bool has_header, int class_col) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");

    std::string line;
    long lineno = 0;
    std::vector<std::vector<std::string>> raw;
    std::vector<std::string> header;

    while (next_line(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (has_header && header.empty() && raw.empty()) {
            header = fields;
            continue;
        }
        if (!raw.empty() && fields.size() != raw.front().size())
            throw ParseError("row has " + std::to_string(fields.size()) +
                                 " fields, expected " +
                                 std::to_string(raw.front().size()),
                             lineno);
        raw.push_back(std::move(fields));
    }
    if (raw.empty()) throw ParseError("'" + path + "' has no data rows");

    const std::size_t width = raw.front().size();
    if (width < 2)
        throw SchemaError("'" + path +
                          "' has a single column; need features plus a class");
    if (!header.empty() && header.size() != width)
        throw ParseError("header has " + std::to_string(header.size()) +
                         " fields but rows have " + std::to_string(width));

    std::size_t cls = class_col < 0 ? width - 1
                                    : static_cast<std::size_t>(class_col);
    if (cls >= width)
        throw SchemaError("class column " + std::to_string(class_col) +
                          " out of range for " + std::to_string(width) +
                          " columns");

    Dataset d;
    for (std::size_t c = 0; c < width; ++c) {
        if (c == cls) continue;
        d.schema.feature_names.push_back(
            header.empty() ? "f" + std::to_string(d.schema.feature_names.size())
                           : header[c]);
    }
    d.schema.feature_values.resize(d.schema.feature_names.size());

    // First-appearance coding, one dictionary per column.
    std::vector<std::map<std::string, std::int32_t>> dict(
        d.schema.feature_names.size());
    std::map<std::string, std::int32_t> class_dict;

    for (const auto& fields : raw) {
        std::size_t j = 0;
        for (std::size_t c = 0; c < width; ++c) {
            const std::string& tok = fields[c];
            if (c == cls) {
                auto [it, inserted] = class_dict.try_emplace(
                    tok, static_cast<std::int32_t>(d.schema.class_labels.size()));
                if (inserted) d.schema.class_labels.push_back(tok);
                d.y.push_back(it->second);
            } else {
                auto [it, inserted] = dict[j].try_emplace(
                    tok,
                    static_cast<std::int32_t>(d.schema.feature_values[j].size()));
                if (inserted) d.schema.feature_values[j].push_back(tok);
                d.x.push_back(it->second);
                ++j;
            }
        }
    }
    d.validate();
    return d;
}

Dataset load_arff(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");

    struct Attr {
        std::string name;
        std::vector<std::string> values;
    };
    std::vector<Attr> attrs;
    std::string line;
    long lineno = 0;
    bool in_data = false;
    std::vector<std::pair<long, std::vector<std::string>>> raw;

    while (next_line(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '%') continue;
        if (!in_data && t[0] == '@') {
            std::string low = lower(t);
            if (low.rfind("@relation", 0) == 0) continue;
            if (low.rfind("@data", 0) == 0) {
                in_data = true;
                continue;
            }
            if (low.rfind("@attribute", 0) == 0) {
                std::string rest = trim(t.substr(10));
                // Name is either quoted or runs to the first whitespace.
                std::string name;
                std::size_t pos;
                if (!rest.empty() && (rest[0] == '\'' || rest[0] == '"')) {
                    pos = rest.find(rest[0], 1);
                    if (pos == std::string::npos)
                        throw ParseError("unterminated attribute name", lineno);
                    name = rest.substr(1, pos - 1);
                    ++pos;
                } else {
                    pos = rest.find_first_of(" \t");
                    if (pos == std::string::npos)
                        throw ParseError("attribute without a type", lineno);
                    name = rest.substr(0, pos);
                }
                std::string type = trim(rest.substr(pos));
                if (type.empty() || type[0] != '{') {
                    throw SchemaError("attribute '" + name + "' has type '" +
                                      type +
                                      "'; only nominal {..} attributes are "
                                      "supported");
                }
                std::size_t close = type.rfind('}');
                if (close == std::string::npos)
                    throw ParseError("unterminated category list", lineno);
                Attr a;
                a.name = name;
                for (auto& v : split_fields(type.substr(1, close - 1)))
                    a.values.push_back(strip_quotes(v));
                if (a.values.empty())
                    throw ParseError("attribute '" + name +
                                         "' declares no categories",
                                     lineno);
                attrs.push_back(std::move(a));
                continue;
            }
            throw ParseError("unrecognized directive '" + t + "'", lineno);
        }
        if (!in_data)
            throw ParseError("data before @data section", lineno);
        if (t[0] == '{')
            throw ParseError("sparse ARFF rows are not supported", lineno);
        auto fields = split_fields(t);
        for (auto& f : fields) f = strip_quotes(f);
        if (fields.size() != attrs.size())
            throw ParseError("row has " + std::to_string(fields.size()) +
                                 " values, expected " +
                                 std::to_string(attrs.size()),
                             lineno);
        raw.emplace_back(lineno, std::move(fields));
    }
    if (attrs.size() < 2)
        throw SchemaError("'" + path +
                          "' declares fewer than two attributes");
    if (raw.empty()) throw ParseError("'" + path + "' has no data rows");

    const std::size_t n = attrs.size() - 1;  // last attribute is the class
    Dataset d;
    for (std::size_t j = 0; j < n; ++j) {
        d.schema.feature_names.push_back(attrs[j].name);
        d.schema.feature_values.push_back(attrs[j].values);
    }
    d.schema.class_labels = attrs.back().values;

    // Code lookup per attribute; '?' lazily appends a category so that a
    // feature that is sometimes unobserved still has a well-defined cell.
    std::vector<std::map<std::string, std::int32_t>> dict(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t v = 0; v < attrs[j].values.size(); ++v)
            dict[j][attrs[j].values[v]] = static_cast<std::int32_t>(v);
    std::map<std::string, std::int32_t> class_dict;
    for (std::size_t k = 0; k < d.schema.class_labels.size(); ++k)
        class_dict[d.schema.class_labels[k]] = static_cast<std::int32_t>(k);

    for (const auto& [row_line, fields] : raw) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::string& tok = fields[j];
            if (tok == "?") {
                auto [it, inserted] = dict[j].try_emplace(
                    "?",
                    static_cast<std::int32_t>(d.schema.feature_values[j].size()));
                if (inserted) d.schema.feature_values[j].push_back("?");
                d.x.push_back(it->second);
                continue;
            }
            auto it = dict[j].find(tok);
            if (it == dict[j].end())
                throw ParseError("value '" + tok + "' not declared for '" +
                                     attrs[j].name + "'",
                                 row_line);
            d.x.push_back(it->second);
        }
        const std::string& cls = fields[n];
        auto it = class_dict.find(cls);
        if (it == class_dict.end())
            throw ParseError(cls == "?" ? "missing class label"
                                        : "class '" + cls + "' not declared",
                             row_line);
        d.y.push_back(it->second);
    }
    d.validate();
    return d;
}

Dataset load_data(const std::string& path, bool has_header, int class_col) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : lower(path.substr(dot));
    if (ext == ".arff") return load_arff(path);
    return load_csv(path, has_header, class_col);
}

namespace {

std::vector<std::vector<std::size_t>> group_by_class(
    const Dataset& data, const std::vector<std::size_t>& rows_idx) {
    std::vector<std::vector<std::size_t>> by_class(data.classes());
    for (std::size_t i : rows_idx)
        by_class[static_cast<std::size_t>(data.label(i))].push_back(i);
    return by_class;
}

// Largest-remainder stratified dealing. Every part gets floor(m_k / P) rows
// of class k; the m_k mod P leftovers land on consecutive parts starting at
// a pointer that advances across classes, so leftovers spread evenly instead
// of piling onto part 0. With sum(m_k) >= P this also guarantees that every
// part is nonempty.
std::vector<std::vector<std::size_t>> stratified_parts(
    std::vector<std::vector<std::size_t>> rows_by_class, std::size_t n_parts,
    SplitMix64& rng) {
    std::vector<std::vector<std::size_t>> parts(n_parts);
    // The pointer starts at a seeded position so the first class's leftovers
    // do not always favour part 0.
    std::size_t extra_ptr = static_cast<std::size_t>(rng.next_below(n_parts));
    for (auto& rows : rows_by_class) {
        shuffle(rows, rng);
        const std::size_t base = rows.size() / n_parts;
        const std::size_t extra = rows.size() % n_parts;
        std::vector<std::size_t> want(n_parts, base);
        for (std::size_t e = 0; e < extra; ++e)
            want[(extra_ptr + e) % n_parts] += 1;
        extra_ptr = (extra_ptr + extra) % n_parts;
        std::size_t cursor = 0;
        for (std::size_t p = 0; p < n_parts; ++p)
            for (std::size_t t = 0; t < want[p]; ++t)
                parts[p].push_back(rows[cursor++]);
    }
    for (auto& p : parts) std::sort(p.begin(), p.end());
    return parts;
}

}  // namespace

std::vector<std::vector<std::size_t>> partition_clients(
    const Dataset& data, std::size_t n_clients, std::uint64_t seed,
    std::size_t min_client_size) {
    if (n_clients == 0) throw PartitionError("need at least one client");
    const std::size_t m = data.rows();
    if (m < n_clients * min_client_size)
        throw PartitionError(
            "cannot spread " + std::to_string(m) + " rows across " +
            std::to_string(n_clients) + " clients: " +
            std::to_string(n_clients * min_client_size) +
            " rows required (min " + std::to_string(min_client_size) +
            " per client)");

    std::vector<std::size_t> all(m);
    for (std::size_t i = 0; i < m; ++i) all[i] = i;
    SplitMix64 rng(derive_seed(seed, "partition", 0));
    return stratified_parts(group_by_class(data, all), n_clients, rng);
}

std::vector<std::vector<std::size_t>> make_folds(
    const Dataset& data, const std::vector<std::size_t>& shard_rows,
    std::size_t k_folds, std::uint64_t seed) {
    if (k_folds < 2) throw FoldError("need at least two folds");
    if (shard_rows.size() < k_folds)
        throw FoldError("shard of " + std::to_string(shard_rows.size()) +
                        " rows cannot fill " + std::to_string(k_folds) +
                        " folds");
    SplitMix64 rng(derive_seed(seed, "folds", 0));
    return stratified_parts(group_by_class(data, shard_rows), k_folds, rng);
}

std::vector<std::size_t> fold_complement(
    const std::vector<std::size_t>& shard_rows,
    const std::vector<std::size_t>& fold_rows) {
    std::vector<std::size_t> out;
    out.reserve(shard_rows.size() - fold_rows.size());
    std::set_difference(shard_rows.begin(), shard_rows.end(),
                        fold_rows.begin(), fold_rows.end(),
                        std::back_inserter(out));
    return out;
}

}  // namespace fedbayes
