#include "s3kit/serialize.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace s3kit {

namespace {

void append_escaped(const std::string& s, std::string& out) {
    out += '"';
    for (unsigned char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (ch < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += static_cast<char>(ch);
                }
        }
    }
    out += '"';
}

void dump_value(const json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                append_escaped(it.key(), out);
                out += ": ";
                dump_value(it.value(), out, indent, depth + 1);
            }
            out += '\n';
            out += close_pad;
            out += '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& el : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                dump_value(el, out, indent, depth + 1);
            }
            out += '\n';
            out += close_pad;
            out += ']';
            return;
        }
        case json::value_t::string:
            append_escaped(j.get<std::string>(), out);
            return;
        case json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            return;
        case json::value_t::null:
            out += "null";
            return;
        case json::value_t::number_integer:
            out += std::to_string(j.get<long long>());
            return;
        case json::value_t::number_unsigned:
            out += std::to_string(j.get<unsigned long long>());
            return;
        case json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            throw ValidationError("cannot serialize a binary/discarded JSON value");
    }
}

const json& require(const json& j, const char* key, const char* what) {
    if (!j.is_object())
        throw ValidationError(std::string(what) + ": expected a JSON object");
    auto it = j.find(key);
    if (it == j.end())
        throw ValidationError(std::string(what) + ": missing field '" + key + "'");
    return *it;
}

double require_number(const json& j, const char* key, const char* what) {
    const json& v = require(j, key, what);
    if (!v.is_number())
        throw ValidationError(std::string(what) + ": field '" + key + "' must be a number");
    double d = v.get<double>();
    if (!std::isfinite(d))
        throw ValidationError(std::string(what) + ": field '" + key + "' must be finite");
    return d;
}

std::size_t require_count(const json& j, const char* key, const char* what) {
    const json& v = require(j, key, what);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ValidationError(std::string(what) + ": field '" + key + "' must be an integer");
    long long n = v.get<long long>();
    if (n < 0)
        throw ValidationError(std::string(what) + ": field '" + key + "' must be nonnegative");
    return static_cast<std::size_t>(n);
}

const json& require_array(const json& j, const char* key, const char* what) {
    const json& v = require(j, key, what);
    if (!v.is_array())
        throw ValidationError(std::string(what) + ": field '" + key + "' must be an array");
    return v;
}

void require_kind(const json& j, const char* kind, const char* what) {
    const json& v = require(j, "kind", what);
    if (!v.is_string() || v.get<std::string>() != kind)
        throw ValidationError(std::string(what) + ": field 'kind' must be \"" + kind + "\"");
}

std::vector<double> number_vector(const json& arr, const char* what) {
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& el : arr) {
        if (!el.is_number() || !std::isfinite(el.get<double>()))
            throw ValidationError(std::string(what) + ": expected finite numbers");
        out.push_back(el.get<double>());
    }
    return out;
}

std::array<double, 2> read_domain(const json& j, const char* what) {
    const json& arr = require_array(j, "domain", what);
    if (arr.size() != 2)
        throw ValidationError(std::string(what) + ": 'domain' must be [lo, hi]");
    std::vector<double> d = number_vector(arr, what);
    if (!(d[0] < d[1]))
        throw ValidationError(std::string(what) + ": domain must satisfy lo < hi");
    return {d[0], d[1]};
}

// Shared neuron/sign block of the chain and omega formats.
void read_neurons_and_signs(const json& j, const char* what, std::vector<ChainNeuron>& neurons,
                            std::vector<int>& signs) {
    const json& narr = require_array(j, "neurons", what);
    neurons.clear();
    neurons.reserve(narr.size());
    for (const auto& el : narr) {
        ChainNeuron neuron;
        neuron.w = require_number(el, "w", what);
        neuron.b = require_number(el, "b", what);
        neurons.push_back(neuron);
    }
    const json& sarr = require_array(j, "signs", what);
    if (sarr.size() != neurons.size())
        throw ValidationError(std::string(what) + ": 'signs' and 'neurons' lengths differ");
    signs.clear();
    signs.reserve(sarr.size());
    for (const auto& el : sarr) {
        if (!el.is_number_integer() && !el.is_number_unsigned())
            throw ValidationError(std::string(what) + ": signs must be integers");
        long long s = el.get<long long>();
        if (s != 1 && s != -1)
            throw ValidationError(std::string(what) + ": signs must be +1 or -1");
        signs.push_back(static_cast<int>(s));
    }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
    std::string out;
    dump_value(j, out, indent, 0);
    out += '\n';
    return out;
}

json pwl_to_json(const PiecewiseLinear& pwl) {
    json j;
    j["breakpoints"] = pwl.breakpoints;
    j["values"] = pwl.values;
    return j;
}

PiecewiseLinear pwl_from_json(const json& j) {
    const char* what = "piecewise function";
    std::vector<double> bp = number_vector(require_array(j, "breakpoints", what), what);
    std::vector<double> vals = number_vector(require_array(j, "values", what), what);
    return make_pwl(std::move(bp), std::move(vals));
}

json chain_to_json(const S3ChainNet& net) {
    json j;
    j["kind"] = "s3_chain";
    json neurons = json::array();
    for (const auto& neuron : net.neurons) {
        json o;
        o["w"] = neuron.w;
        o["b"] = neuron.b;
        neurons.push_back(std::move(o));
    }
    j["neurons"] = std::move(neurons);
    j["signs"] = net.signs;
    j["output_bias"] = net.output_bias;
    j["shift_c"] = net.shift_c;
    j["domain"] = json::array({net.domain[0], net.domain[1]});
    return j;
}

S3ChainNet chain_from_json(const json& j) {
    const char* what = "chain network";
    require_kind(j, "s3_chain", what);
    S3ChainNet net;
    read_neurons_and_signs(j, what, net.neurons, net.signs);
    net.output_bias = require_number(j, "output_bias", what);
    net.shift_c = require_number(j, "shift_c", what);
    net.domain = read_domain(j, what);
    return net;
}

json omega_to_json(const OmegaNet& net) {
    json j;
    j["kind"] = "omega";
    json parents = json::array();
    for (int p : net.topology.parents) {
        if (p == kInputParent) parents.push_back("I");
        else parents.push_back(p);
    }
    j["parents"] = std::move(parents);
    json neurons = json::array();
    for (const auto& neuron : net.neurons) {
        json o;
        o["w"] = neuron.w;
        o["b"] = neuron.b;
        neurons.push_back(std::move(o));
    }
    j["neurons"] = std::move(neurons);
    j["signs"] = net.signs;
    j["output_bias"] = net.output_bias;
    j["shift_c"] = net.shift_c;
    j["domain"] = json::array({net.domain[0], net.domain[1]});
    return j;
}

OmegaNet omega_from_json(const json& j) {
    const char* what = "omega network";
    require_kind(j, "omega", what);
    OmegaNet net;
    const json& parr = require_array(j, "parents", what);
    net.topology.parents.reserve(parr.size());
    for (const auto& el : parr) {
        if (el.is_string() && el.get<std::string>() == "I") {
            net.topology.parents.push_back(kInputParent);
        } else if (el.is_number_integer() || el.is_number_unsigned()) {
            long long p = el.get<long long>();
            if (p < 0)
                throw ValidationError(std::string(what) + ": parent indices must be >= 0 or \"I\"");
            net.topology.parents.push_back(static_cast<int>(p));
        } else {
            throw ValidationError(std::string(what) + ": parents must be \"I\" or integers");
        }
    }
    require_valid_topology(net.topology);
    read_neurons_and_signs(j, what, net.neurons, net.signs);
    if (net.neurons.size() != net.topology.parents.size())
        throw ValidationError(std::string(what) + ": 'neurons' and 'parents' lengths differ");
    net.output_bias = require_number(j, "output_bias", what);
    net.shift_c = require_number(j, "shift_c", what);
    net.domain = read_domain(j, what);
    return net;
}

json ka_to_json(const KANet& net) {
    json j;
    j["kind"] = "ka_net";
    j["decomposition"] = net.decomposition_name;
    j["n"] = net.n;
    j["sigma"] = net.sigma;
    json inner = json::array();
    for (const auto& row : net.inner_nets) {
        json jrow = json::array();
        for (const auto& chain : row) jrow.push_back(chain_to_json(chain));
        inner.push_back(std::move(jrow));
    }
    j["inner"] = std::move(inner);
    json outer = json::array();
    for (const auto& chain : net.outer_nets) outer.push_back(chain_to_json(chain));
    j["outer"] = std::move(outer);
    return j;
}

KANet ka_from_json(const json& j) {
    const char* what = "ka network";
    require_kind(j, "ka_net", what);
    KANet net;
    const json& name = require(j, "decomposition", what);
    if (!name.is_string())
        throw ValidationError(std::string(what) + ": 'decomposition' must be a string");
    net.decomposition_name = name.get<std::string>();
    net.n = require_count(j, "n", what);
    if (net.n < 2) throw ValidationError(std::string(what) + ": n must be >= 2");
    net.sigma = require_number(j, "sigma", what);
    if (!(net.sigma > 0.0)) throw ValidationError(std::string(what) + ": sigma must be positive");
    const std::size_t rows = 2 * net.n + 1;
    const json& inner = require_array(j, "inner", what);
    if (inner.size() != rows)
        throw ValidationError(std::string(what) + ": 'inner' must have 2n+1 rows");
    net.inner_nets.reserve(rows);
    for (const auto& jrow : inner) {
        if (!jrow.is_array() || jrow.size() != net.n)
            throw ValidationError(std::string(what) + ": each inner row must have n chains");
        std::vector<S3ChainNet> row;
        row.reserve(net.n);
        for (const auto& el : jrow) row.push_back(chain_from_json(el));
        net.inner_nets.push_back(std::move(row));
    }
    const json& outer = require_array(j, "outer", what);
    if (outer.size() != rows)
        throw ValidationError(std::string(what) + ": 'outer' must have 2n+1 chains");
    net.outer_nets.reserve(rows);
    for (const auto& el : outer) net.outer_nets.push_back(chain_from_json(el));
    return net;
}

json profile_to_json(const NormProfile& profile) {
    json layers = json::array();
    for (const auto& layer : profile.layers) {
        json o;
        o["rho"] = layer.lipschitz;
        o["s"] = layer.spectral_bound;
        o["b"] = layer.two_one_bound;
        o["bf"] = layer.frobenius_bound;
        o["d"] = layer.out_dim;
        o["n"] = layer.in_dim;
        layers.push_back(std::move(o));
    }
    json j;
    j["layers"] = std::move(layers);
    return j;
}

std::vector<Matrix> matrices_from_json(const json& j) {
    const char* what = "weight stack";
    const json& arr = j.is_array() ? j : require_array(j, "matrices", what);
    if (arr.empty()) throw ValidationError(std::string(what) + ": no matrices given");
    std::vector<Matrix> mats;
    mats.reserve(arr.size());
    for (const auto& jm : arr) {
        if (!jm.is_array() || jm.empty())
            throw ValidationError(std::string(what) + ": each matrix must be a nonempty 2D array");
        Matrix m;
        m.rows = jm.size();
        for (const auto& jrow : jm) {
            if (!jrow.is_array() || jrow.empty())
                throw ValidationError(std::string(what) + ": matrix rows must be nonempty arrays");
            if (m.cols == 0) m.cols = jrow.size();
            if (jrow.size() != m.cols)
                throw ValidationError(std::string(what) + ": matrix rows have unequal lengths");
            for (const auto& el : jrow) {
                if (!el.is_number() || !std::isfinite(el.get<double>()))
                    throw ValidationError(std::string(what) + ": matrix entries must be finite numbers");
                m.data.push_back(el.get<double>());
            }
        }
        mats.push_back(std::move(m));
    }
    return mats;
}

NormProfile profile_from_json(const json& j) {
    const char* what = "norm profile";
    if (j.is_object() && j.contains("matrices"))
        return profile_from_matrices(matrices_from_json(j));

    const json& layers = require_array(j, "layers", what);
    if (layers.empty()) throw ValidationError(std::string(what) + ": 'layers' is empty");
    NormProfile profile;
    profile.layers.reserve(layers.size());
    for (const auto& el : layers) {
        LayerNorms layer;
        layer.lipschitz = require_number(el, "rho", what);
        layer.spectral_bound = require_number(el, "s", what);
        layer.two_one_bound = require_number(el, "b", what);
        layer.frobenius_bound = el.is_object() && el.contains("B_F")
                                    ? require_number(el, "B_F", what)
                                    : require_number(el, "bf", what);
        layer.out_dim = require_count(el, "d", what);
        layer.in_dim = require_count(el, "n", what);
        if (layer.out_dim == 0 || layer.in_dim == 0)
            throw ValidationError(std::string(what) + ": layer dimensions must be >= 1");
        profile.layers.push_back(layer);
    }
    return profile;
}

json report_to_json(const BoundReport& report) {
    json j;
    j["kind"] = "bound_report";
    json comps = json::array();
    for (const auto& c : report.comparisons) {
        json o;
        o["name"] = c.name;
        o["dense"] = c.dense_value;
        o["s3"] = c.s3_value;
        o["s3_not_worse"] = c.s3_not_worse;
        comps.push_back(std::move(o));
    }
    j["comparisons"] = std::move(comps);
    j["all_verdicts_hold"] = report.all_verdicts_hold;
    j["dense_profile"] = profile_to_json(report.dense_profile);
    j["s3_profile"] = profile_to_json(report.s3_profile);
    return j;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed on '" + path + "'");
    return ss.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw IoError("write failed on '" + tmp + "'");
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        int err = errno;
        std::remove(tmp.c_str());
        throw IoError("cannot move '" + tmp + "' to '" + path + "': " + std::strerror(err));
    }
}

json read_json(const std::string& path) {
    json j = json::parse(read_text(path), nullptr, false);
    if (j.is_discarded()) throw ValidationError("invalid JSON in '" + path + "'");
    return j;
}

void write_json_atomic(const std::string& path, const json& j) {
    write_text_atomic(path, dump_json(j));
}

namespace {

void check_cell(const std::string& cell, const char* what) {
    if (cell.find_first_of(",\r\n") != std::string::npos)
        throw ValidationError(std::string(what) + ": cells must not contain commas or line breaks");
}

double parse_cell(const std::string& cell, const std::string& column) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v))
        throw ValidationError("csv: non-numeric cell '" + cell + "' in column '" + column + "'");
    return v;
}

}  // namespace

std::string csv_to_string(const Csv& csv) {
    if (csv.header.empty()) throw ValidationError("csv: header must be nonempty");
    std::string out;
    for (std::size_t i = 0; i < csv.header.size(); ++i) {
        check_cell(csv.header[i], "csv header");
        if (i) out += ',';
        out += csv.header[i];
    }
    out += '\n';
    for (const auto& row : csv.rows) {
        if (row.size() > csv.header.size())
            throw ValidationError("csv: row has more cells than the header");
        for (std::size_t i = 0; i < csv.header.size(); ++i) {
            if (i) out += ',';
            if (i < row.size()) {
                check_cell(row[i], "csv cell");
                out += row[i];
            }
        }
        out += '\n';
    }
    return out;
}

Csv csv_from_string(const std::string& text) {
    Csv csv;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() : eol + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && pos >= text.size()) break;  // trailing newline

        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!have_header) {
            csv.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() > csv.header.size())
            throw ValidationError("csv: row " + std::to_string(csv.rows.size() + 1) +
                                  " has more cells than the header");
        cells.resize(csv.header.size());
        csv.rows.push_back(std::move(cells));
    }
    if (!have_header || csv.header.empty())
        throw ValidationError("csv: missing header row");
    return csv;
}

Csv read_csv(const std::string& path) {
    return csv_from_string(read_text(path));
}

void write_csv_atomic(const std::string& path, const Csv& csv) {
    write_text_atomic(path, csv_to_string(csv));
}

std::vector<double> csv_column(const Csv& csv, const std::string& name) {
    auto it = std::find(csv.header.begin(), csv.header.end(), name);
    if (it == csv.header.end()) {
        std::string known;
        for (std::size_t i = 0; i < csv.header.size(); ++i) {
            if (i) known += ", ";
            known += csv.header[i];
        }
        throw ValidationError("csv: no column '" + name + "' (columns: " + known + ")");
    }
    std::size_t idx = static_cast<std::size_t>(it - csv.header.begin());
    std::vector<double> out;
    for (const auto& row : csv.rows) {
        if (idx >= row.size() || row[idx].empty()) continue;  // missing value
        out.push_back(parse_cell(row[idx], name));
    }
    if (out.empty()) throw ValidationError("csv: column '" + name + "' has no values");
    return out;
}

Csv table_to_csv(const SampleTable& table) {
    if (table.names.size() != table.columns.size())
        throw ValidationError("sample table: names/columns size mismatch");
    Csv csv;
    csv.header = table.names;
    std::size_t depth = 0;
    for (const auto& col : table.columns) depth = std::max(depth, col.size());
    csv.rows.assign(depth, std::vector<std::string>(table.names.size()));
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        for (std::size_t r = 0; r < table.columns[c].size(); ++r)
            csv.rows[r][c] = format_double(table.columns[c][r]);
    return csv;
}

SampleTable table_from_csv(const Csv& csv) {
    SampleTable table;
    table.names = csv.header;
    table.columns.reserve(csv.header.size());
    table.dropped.assign(csv.header.size(), 0);
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
        std::vector<double> col;
        for (const auto& row : csv.rows) {
            if (c >= row.size() || row[c].empty()) {
                ++table.dropped[c];
                continue;
            }
            col.push_back(parse_cell(row[c], csv.header[c]));
        }
        if (col.empty())
            throw ValidationError("sample table: column '" + csv.header[c] + "' has no values");
        table.columns.push_back(std::move(col));
    }
    return table;
}

}  // namespace s3kit
