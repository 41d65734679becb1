package demo.stats;

import java.util.HashMap;
import java.util.Map;

public class Counter {
    private final Map<String, Integer> counts = new HashMap<>();

    // increment the count of the word
    public void incrementCount(String word) {
        counts.put(word, counts.getOrDefault(word, 0) + 1);
    }

    /**
     * Returns the count of the word, or zero when the word was never counted.
     */
    public int getCount(String word) {
        return counts.getOrDefault(word, 0);
    }

    /**
     * Finds the most frequent word among the counted words.
     */
    public String mostFrequentWord() {
        String best = null;
        int bestCount = 0;
        for (Map.Entry<String, Integer> entry : counts.entrySet()) {
            if (entry.getValue() > bestCount) {
                best = entry.getKey();
                bestCount = entry.getValue();
            }
        }
        return best;
    }
}
