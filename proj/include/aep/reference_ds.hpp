#pragma once

// Built-in d_s table, used when pde.ds_table is empty. Produced by
// `aep selfdiff configs/selfdiff.ini` (N = 64, 200 microscopic time units,
// 32 replicas per node, 2e5 replicas at rho = 0) and frozen; the same numbers
// are in data/ds_table.csv.

#include "aep/selfdiff.hpp"

namespace aep {

inline DsTable reference_ds_table() {
  return DsTable::from_estimates(
      {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
      {0.9958726625000116, 0.8475700186344558, 0.7239728789594678, 0.578783209770025, 0.46010019907397604, 0.3548907704516229, 0.2594930273440853, 0.18427069601959792, 0.11037656685357147, 0.05197949127860792, 0.0},
      {0.0038774998697594953, 0.01220716496060274, 0.007797704300644152, 0.005546644354589762, 0.0032501316152895297, 0.0027551718146511792, 0.0018802301220365355, 0.0016217482624864116, 0.0008298000319456953, 0.0005572665887778023, 0.0});
}

}  // namespace aep
