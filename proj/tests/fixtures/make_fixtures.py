"""Regenerates the JSON fixtures in this directory (stdlib only)."""
import json
import pathlib

HERE = pathlib.Path(__file__).parent

POOL = {
    "cocktail": [("user", "I took a cocktail making class last weekend."),
                 ("assistant", "That sounds fun! What cocktails did you learn to make?"),
                 ("user", "We made mojitos and old fashioneds.")],
    "dentist": [("user", "My dentist appointment got moved to Thursday at 3pm."),
                ("assistant", "Noted. Do you want a reminder the day before?")],
    "puppy": [("user", "We adopted a labrador puppy named Biscuit from the shelter."),
              ("assistant", "Congratulations! Labradors are great family dogs.")],
    "laptop": [("user", "I upgraded my laptop to a new macbook with 32GB of memory."),
               ("assistant", "Nice upgrade, that should handle video editing well.")],
    "marathon": [("user", "I finished the city marathon in 4 hours 12 minutes."),
                 ("assistant", "Great time for a first marathon!")],
    "backpain": [("user", "My lower back has been hurting after long days at the desk."),
                 ("assistant", "I recommend stretching every hour, a lumbar pillow and gentle yoga.")],
    "paris": [("user", "We booked a hotel in Paris for our anniversary in October."),
              ("assistant", "Paris in autumn is lovely. Consider a Seine river cruise.")],
    "sourdough": [("user", "I baked my first sourdough loaf using the starter from my neighbor."),
                  ("assistant", "Sourdough takes patience; how did the crumb turn out?")],
    "budget": [("user", "I set a monthly grocery budget of 400 dollars."),
               ("assistant", "A grocery budget is a solid first step for savings.")],
    "guitar": [("user", "I started guitar lessons with a teacher on Saturdays."),
               ("assistant", "Try practicing chord changes for ten minutes a day.")],
    "movies": [("user", "I prefer slow-burn thrillers over action movies."),
               ("assistant", "You might enjoy Prisoners or Zodiac then.")],
    "moved": [("user", "I moved to a new apartment downtown, the rent is higher but the commute is short."),
              ("assistant", "A shorter commute can be worth the extra rent.")],
}
DATES = {k: f"2023/0{1 + i % 9}/1{i % 10} (Mon) 10:00" for i, k in enumerate(POOL)}


def session(key):
    return [{"role": r, "content": c} for r, c in POOL[key]]


def instance(qid, qtype, question, gold, haystack):
    return {
        "question_id": qid,
        "question_type": qtype,
        "question": question,
        "answer": "n/a",
        "question_date": "2023/10/01 (Sun) 09:00",
        "haystack_session_ids": [f"sess_{k}" for k in haystack],
        "haystack_dates": [DATES[k] for k in haystack],
        "haystack_sessions": [session(k) for k in haystack],
        "answer_session_ids": [f"sess_{k}" for k in gold],
    }


HAY = ["cocktail", "dentist", "puppy", "laptop", "marathon", "backpain", "paris", "sourdough"]
HAY2 = ["budget", "guitar", "movies", "moved", "cocktail", "puppy", "paris", "laptop"]

small = [
    instance("ssu_1", "single-session-user", "What did I name the puppy I adopted?", ["puppy"], HAY),
    instance("ssu_2", "single-session-user", "What instrument did I start taking lessons for?", ["guitar"], HAY2),
    instance("ssa_1", "single-session-assistant", "What did you recommend for my back pain?", ["backpain"], HAY),
    instance("ssa_2", "single-session-assistant", "Which movies did you suggest I watch?", ["movies"], HAY2),
    instance("ssp_1", "single-session-preference", "Can you recommend a weekend activity involving drinks?",
             ["cocktail"], HAY),
    instance("ssp_2", "single-session-preference", "Can you suggest a film for tonight?", ["movies"], HAY2),
    instance("ms_1", "multi-session", "How many pets and trips have I mentioned?", ["puppy", "paris"], HAY),
    instance("ms_2", "multi-session", "How much am I spending on rent and groceries in total?",
             ["budget", "moved"], HAY2),
    instance("tr_1", "temporal-reasoning", "When did I run the marathon?", ["marathon"], HAY),
    instance("tr_2", "temporal-reasoning", "When did I move to my new apartment?", ["moved"], HAY2),
    instance("ku_1", "knowledge-update", "What laptop do I use now?", ["laptop"], HAY),
    instance("ku_2", "knowledge-update", "Where is my current apartment?", ["moved"], HAY2),
    instance("ssu_3_abs", "single-session-user", "What is the name of my goldfish?", [], HAY),
]
minimal = [instance("q1", "single-session-user", "What did we make in the cocktail class?", ["cocktail"],
                    ["cocktail", "dentist", "puppy"])]

for name, data in [("small_benchmark.json", small), ("minimal_benchmark.json", minimal)]:
    (HERE / name).write_text(json.dumps(data, indent=1) + "\n")
