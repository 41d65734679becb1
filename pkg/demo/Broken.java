package demo.broken;

public class Broken {

    /**
     * Returns the sum of the two values.
     */
    public int sumValues(int first, int second) {
        return first + second;
    }

    // this method is never closed: the values loop is missing its end
    public void printValues(int[] values) {
        for (int value : values) {
            System.out.println(value);
        }
