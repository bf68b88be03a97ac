#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "s3kit/bounds.hpp"
#include "s3kit/ka.hpp"
#include "s3kit/omega.hpp"
#include "s3kit/piecewise.hpp"
#include "s3kit/s3_chain.hpp"
#include "s3kit/train_stats.hpp"

namespace s3kit {

using json = nlohmann::ordered_json;

// JSON text with every float printed to 17 significant digits (round-trip
// faithful and stable across platforms, unlike shortest-form printing).
std::string dump_json(const json& j, int indent = 2);

json pwl_to_json(const PiecewiseLinear& pwl);
PiecewiseLinear pwl_from_json(const json& j);

json chain_to_json(const S3ChainNet& net);
S3ChainNet chain_from_json(const json& j);

// Omega parents serialize as a mixed array matching the text format: the
// string "I" for the input, otherwise the integer index of the parent neuron.
json omega_to_json(const OmegaNet& net);
OmegaNet omega_from_json(const json& j);

json ka_to_json(const KANet& net);
KANet ka_from_json(const json& j);

// Norm profiles load from either summary form {"layers":[{rho,s,b,bf,d,n}]}
// or raw form {"matrices":[[[...]]]} (norms are then extracted here).
json profile_to_json(const NormProfile& profile);
NormProfile profile_from_json(const json& j);

// Raw weight stack: either {"matrices":[...]} or a bare array of 2D arrays.
std::vector<Matrix> matrices_from_json(const json& j);

json report_to_json(const BoundReport& report);

// --- files ---------------------------------------------------------------
// Unreadable/unwritable files raise IoError; malformed content raises
// ValidationError (the CLI maps these to exit 2 and 1 respectively).

std::string read_text(const std::string& path);
void write_text_atomic(const std::string& path, const std::string& content);
json read_json(const std::string& path);
void write_json_atomic(const std::string& path, const json& j);

// --- CSV -----------------------------------------------------------------
// Header row, comma separator, LF line endings. Cells are kept as strings at
// this layer; empty cells mark missing values (ragged sample columns).

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string csv_to_string(const Csv& csv);
Csv csv_from_string(const std::string& text);
Csv read_csv(const std::string& path);
void write_csv_atomic(const std::string& path, const Csv& csv);

// Column lookup by header name; empty cells are skipped, non-numeric cells
// are an error. The column must end up nonempty.
std::vector<double> csv_column(const Csv& csv, const std::string& name);

Csv table_to_csv(const SampleTable& table);
SampleTable table_from_csv(const Csv& csv);

}  // namespace s3kit
