// Analyze one household end to end and print the headline numbers.
//
//   quickstart data_templates/house.csv data_templates/house.building.json

#include <iostream>

#include "homewise/batch.hpp"
#include "homewise/pipeline.hpp"

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: quickstart <meter.csv> <building.json>\n";
    return 1;
  }
  try {
    homewise::DatasetInput in;
    in.source_name = argv[1];
    in.content = homewise::read_text_file(argv[1]);
    in.building_fields = homewise::building_fields_from_json_text(homewise::read_text_file(argv[2]));

    const homewise::Config cfg;
    const auto dataset = homewise::prepare_dataset(in, cfg);
    const auto report = homewise::analyze_dataset(dataset, cfg, /*seed=*/42);

    std::cout << "building " << dataset.pseudonym << "\n"
              << "intensity " << report.profile.kwh_per_m2_annualized << " kWh/m2/yr\n"
              << "anomalies " << report.flags.size() << "\n";
    for (const auto& row : report.table.rows) {
      std::cout << "  " << row.kind << ": " << row.kwh_saved_yr << " kWh/yr";
      if (row.payback_years) std::cout << ", payback " << *row.payback_years << " yr";
      std::cout << "\n";
    }
  } catch (const homewise::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
