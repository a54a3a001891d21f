#ifndef CSO_CLI_H_
#define CSO_CLI_H_

#include <string>
#include <vector>

#include "cso/classifier.h"
#include "cso/ontology.h"

namespace cso {

inline constexpr char kToolVersion[] = "0.1.0";

// "topic,count" CSV: for each topic, the number of annotations whose
// enhanced set holds it, sorted by count descending then topic. Throws
// InputError naming the document for a topic missing from `o`.
std::string StatsReport(const std::vector<Annotation> &annotations,
                        const Ontology &o);

// Entry point of the command-line tool. Returns the process exit status.
int RunCli(int argc, char **argv);

}  // namespace cso

#endif  // CSO_CLI_H_
