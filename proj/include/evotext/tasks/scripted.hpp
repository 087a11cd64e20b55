#pragma once

#include <memory>

#include "evotext/provider.hpp"
#include "evotext/task.hpp"

namespace evotext::tasks {

// Deterministic offline stand-in for the language model, specialized per gene
// kind. Rules transform the delimited blocks embedded in prompts (parse,
// recombine, re-emit) so runs exercise the same prompt -> text -> parse
// pipeline as a live model. Responses are pure functions of the request plus
// the seed, so runs reproduce exactly regardless of concurrency.
std::unique_ptr<Provider> make_scripted_provider(const TaskDefinition& task, uint64_t seed,
                                                 int max_in_flight = 8);

// Index baked into generation prompts via {variation_hint} so a deterministic
// backend can still seed a varied population.
std::string variation_hint_for(size_t index);

}  // namespace evotext::tasks
