#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "nestlog/diagnostics.hpp"
#include "nestlog/inference.hpp"
#include "nestlog/model.hpp"
#include "nestlog/posterior.hpp"

namespace nestlog {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// CSV with a header of variable names and an optional trailing
/// `partition` column holding each row's occurrence partition in tree text
/// form ("1,2|3", quoted). Parse failures throw std::runtime_error.
void write_csv(std::ostream& out, const MaximaDataset& data);
MaximaDataset read_csv(std::istream& in);
void write_csv_file(const std::string& path, const MaximaDataset& data);
MaximaDataset read_csv_file(const std::string& path);

/// Newline-delimited JSON: one header object, then one object per record.
void write_chain(std::ostream& out, const ChainTrace& trace);
ChainTrace read_chain(std::istream& in);
void write_chain_file(const std::string& path, const ChainTrace& trace);
ChainTrace read_chain_file(const std::string& path);

std::string summary_json(const PosteriorSummary& summary, int indent = 2);

}  // namespace nestlog
