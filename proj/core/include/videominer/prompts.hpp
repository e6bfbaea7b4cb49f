// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_PROMPTS_HPP_
#define VIDEOMINER_PROMPTS_HPP_

#include <string_view>

namespace videominer::prompts {

inline constexpr std::string_view kVersion = "v1";

inline constexpr std::string_view kCaptionSystem =
    "You describe short video events. Mention the people, objects and actions "
    "that matter for the user's question. Answer in one or two sentences.";

inline constexpr std::string_view kCaptionUser =
    "Question: {question}\nDescribe this event (frames {start} to {end}).";

inline constexpr std::string_view kDecideSystem =
    "You explore a video tree to find the key frames needed to answer a "
    "question. For the node below choose one action: accept (the node holds "
    "the key frames), continue (the node may be relevant and should be split "
    "further) or delete (irrelevant). Reason inside <think></think>, then "
    "give only the action inside <answer></answer>.";

inline constexpr std::string_view kDecideUser =
    "Question: {question}\nNode depth: {depth}\nNode captions: {caption}";

inline constexpr std::string_view kAnswerSystem =
    "Answer the question using the captions of the selected key frames. For "
    "multiple-choice questions reply with the option letter first.";

inline constexpr std::string_view kAnswerUser = "Captions:\n{captions}\nQuestion: {question}";

}  // namespace videominer::prompts

#endif  // VIDEOMINER_PROMPTS_HPP_
