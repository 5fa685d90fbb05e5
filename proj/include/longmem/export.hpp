#pragma once

#include "longmem/dcca.hpp"
#include "longmem/hurst.hpp"
#include "longmem/network.hpp"
#include "longmem/scaling.hpp"

#include "json.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

// Plot-ready tables (comma separated, header row, shortest round-trip
// numbers), JSON records and graph exchange formats for every result type.
namespace longmem::io {

void write_fluctuation_table(std::ostream& out, const FluctuationFunction& f);
/// Long format over several series: id,s,F,n_segments.
void write_fluctuation_table(std::ostream& out, std::span<const FluctuationFunction> fs);
void write_cross_fluctuation_table(std::ostream& out, const CrossFluctuation& f);

void write_hurst_table(std::ostream& out, std::span<const HurstEstimate> estimates);
void write_histogram_table(std::ostream& out, const HurstHistogram& h);
void write_crossover_table(std::ostream& out,
                           std::span<const std::pair<std::string, CrossoverReport>> reports);

void write_matrix_table(std::ostream& out, const DccaMatrix& m);
void write_rho_curve_table(std::ostream& out, const RhoCurve& curve);

void write_partition_table(std::ostream& out, const CommunityPartition& p);
/// Node attribute `community` is written when a partition is given.
void write_graphml(std::ostream& out, const CorrelationNetwork& net, const CommunityPartition* p = nullptr);
void write_dot(std::ostream& out, const CorrelationNetwork& net, const CommunityPartition* p = nullptr);

nlohmann::ordered_json to_json(const DetrendMethod& m);
nlohmann::ordered_json to_json(const FluctuationFunction& f);
nlohmann::ordered_json to_json(const CrossFluctuation& f);
nlohmann::ordered_json to_json(const HurstEstimate& e);
nlohmann::ordered_json to_json(const HurstHistogram& h);
nlohmann::ordered_json to_json(const CrossoverReport& r);
nlohmann::ordered_json to_json(const DccaMatrix& m);
nlohmann::ordered_json to_json(const RhoCurve& c);
nlohmann::ordered_json to_json(const CorrelationNetwork& net);
nlohmann::ordered_json to_json(const CommunityPartition& p);

}  // namespace longmem::io
